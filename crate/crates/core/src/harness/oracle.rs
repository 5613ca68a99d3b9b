use nalgebra::DMatrix;

use crate::error::{FdemError, Result};
use crate::regops::{Boundary, Lap2d};
use crate::scalar::Real;

/// Largest image (in pixels) the dense oracle accepts.
pub const ORACLE_SIZE_CAP: usize = 400;

/// `(I + eta D^T D)^-1 rhs` by dense Cholesky, with the reflexive Laplacian.
pub fn oracle_dense_xi<T: Real>(rhs: &DMatrix<T>, eta: T) -> Result<DMatrix<T>> {
    let (n, big_n) = rhs.shape();
    let size = n * big_n;
    if size > ORACLE_SIZE_CAP {
        return Err(FdemError::SizeCap { cap: ORACLE_SIZE_CAP, size });
    }
    let d: DMatrix<T> = Lap2d::new(n, big_n, Boundary::Reflexive)?.dense();
    let sys = DMatrix::identity(size, size) + d.transpose() * &d * eta;
    let chol = sys.cholesky().ok_or(FdemError::NonFinite("oracle system"))?;
    let x = chol.solve(&DMatrix::from_column_slice(size, 1, rhs.as_slice()));
    Ok(DMatrix::from_column_slice(n, big_n, x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{mm_u_update, SolverParams, XiSolver};

    fn image(n: usize, big_n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, big_n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.2)
    }

    #[test]
    fn zero_eta_returns_rhs() {
        let rhs = image(5, 6);
        assert!((oracle_dense_xi(&rhs, 0.0).unwrap() - &rhs).amax() < 1e-14);
    }

    #[test]
    fn agrees_with_one_mm_step() {
        let (n, big_n) = (10, 20);
        let sigma = image(n, big_n);
        let params = SolverParams::<f64> { q: 0.5, gamma: 1e-3, ..Default::default() };
        let solver = XiSolver::new(n, big_n).unwrap();
        let step = solver.step(&sigma, &sigma, &params).unwrap();
        let u = mm_u_update(solver.lap.apply(&sigma).unwrap().as_slice(), params.q, params.epsilon);
        let du = solver.lap.apply_slice(&u).unwrap();
        let eta = params.eta();
        let rhs = DMatrix::from_fn(n, big_n, |i, j| sigma[(i, j)] + eta * du[i + j * n]);
        let want = oracle_dense_xi(&rhs, eta).unwrap();
        assert!((step - want).amax() < 1e-10);
    }

    #[test]
    fn system_is_symmetric_positive_definite() {
        let d: DMatrix<f64> = Lap2d::new(4, 5, Boundary::Reflexive).unwrap().dense();
        let sys = DMatrix::identity(20, 20) + d.transpose() * &d * 0.7;
        assert_eq!(sys, sys.transpose());
        assert!(sys.symmetric_eigenvalues().min() >= 1.0 - 1e-12);
    }

    #[test]
    fn size_cap() {
        assert!(matches!(oracle_dense_xi(&DMatrix::<f64>::zeros(20, 21), 1.0), Err(FdemError::SizeCap { .. })));
    }
}
