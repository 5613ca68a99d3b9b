//! Real stacked residuals and Jacobians of the forward map, and their
//! augmentation with the coupling block `sqrt(beta) (sigma - xi)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{FdemError, Result};
use crate::forward::{ForwardOperator, Readings};
use crate::scalar::{lit, Real};

/// `[Re v; Im v]`.
pub fn stack_complex<T: Real>(v: &DVector<Complex<T>>) -> DVector<T> {
    let m = v.len();
    DVector::from_fn(2 * m, |i, _| if i < m { v[i].re } else { v[i - m].im })
}

/// `[Re A; Im A]`.
pub fn stack_complex_matrix<T: Real>(a: &DMatrix<Complex<T>>) -> DMatrix<T> {
    let m = a.nrows();
    DMatrix::from_fn(2 * m, a.ncols(), |i, j| if i < m { a[(i, j)].re } else { a[(i - m, j)].im })
}

/// Finite-difference step for a conductivity value and whether the central
/// stencil stays nonnegative.
pub fn fd_step<T: Real>(sigma: T) -> (T, bool) {
    let base: T = lit(1e-6);
    let h = base.max(base * sigma.abs());
    (h, sigma - h >= T::zero())
}

/// A real-valued forward map with a stacked Jacobian, as consumed by the
/// Gauss–Newton solvers.
pub trait StackedForward<T: Real>: Sync {
    fn n_params(&self) -> usize;

    fn n_outputs(&self) -> usize;

    fn stacked(&self, sigma: &[T]) -> Result<DVector<T>>;

    fn stacked_jacobian(&self, sigma: &[T]) -> Result<DMatrix<T>> {
        fd_jacobian(|s| self.stacked(s), sigma)
    }
}

impl<T: Real> StackedForward<T> for ForwardOperator<T> {
    fn n_params(&self) -> usize {
        self.n_layers()
    }

    fn n_outputs(&self) -> usize {
        2 * self.n_readings()
    }

    fn stacked(&self, sigma: &[T]) -> Result<DVector<T>> {
        Ok(stack_complex(&self.evaluate(sigma)?))
    }

    fn stacked_jacobian(&self, sigma: &[T]) -> Result<DMatrix<T>> {
        Ok(stack_complex_matrix(&self.jacobian(sigma)?))
    }
}

/// Column-wise finite differences of `f` at `sigma` with the [`fd_step`] policy.
pub fn fd_jacobian<T: Real, F>(f: F, sigma: &[T]) -> Result<DMatrix<T>>
where
    F: Fn(&[T]) -> Result<DVector<T>>,
{
    let base = f(sigma)?;
    let mut jac = DMatrix::zeros(base.len(), sigma.len());
    let mut probe = sigma.to_vec();
    for i in 0..sigma.len() {
        let (h, central) = fd_step(sigma[i]);
        probe[i] = sigma[i] + h;
        let up = f(&probe)?;
        let col = if central {
            probe[i] = sigma[i] - h;
            let down = f(&probe)?;
            (up - down) / (h + h)
        } else {
            (up - &base) / h
        };
        jac.set_column(i, &col);
        probe[i] = sigma[i];
    }
    Ok(jac)
}

/// `[Re(M(sigma) - b); Im(M(sigma) - b)]`.
pub fn stacked_residual<T: Real>(operator: &ForwardOperator<T>, sigma: &[T], data: &Readings<T>) -> Result<DVector<T>> {
    let predicted = operator.evaluate(sigma)?;
    if predicted.len() != data.len() {
        return Err(FdemError::DimensionMismatch { expected: predicted.len(), found: data.len() });
    }
    Ok(stack_complex(&(predicted - data)))
}

/// Residual and Jacobian of the coupled column problem
/// `1/2 ||M(sigma) - b||^2 + beta/2 ||sigma - xi||^2`.
#[derive(Debug, Clone)]
pub struct AugmentedSystem<T: Real> {
    pub residual: DVector<T>,
    pub jacobian: DMatrix<T>,
    pub beta: T,
}

impl<T: Real> AugmentedSystem<T> {
    /// Rows belonging to the data misfit.
    pub fn data_rows(&self) -> usize {
        self.residual.len() - self.jacobian.ncols()
    }
}

/// Appends `sqrt(beta) (sigma - xi)` to the residual and `sqrt(beta) I` to the Jacobian.
pub fn augment<T: Real>(
    residual: &DVector<T>,
    jacobian: &DMatrix<T>,
    sigma: &[T],
    xi: &[T],
    beta: T,
) -> Result<AugmentedSystem<T>> {
    let n = jacobian.ncols();
    if !(beta > T::zero()) {
        return Err(FdemError::InvalidParams("coupling weight beta must be positive".into()));
    }
    if sigma.len() != n || xi.len() != n {
        return Err(FdemError::DimensionMismatch { expected: n, found: sigma.len().min(xi.len()) });
    }
    if residual.len() != jacobian.nrows() {
        return Err(FdemError::DimensionMismatch { expected: jacobian.nrows(), found: residual.len() });
    }
    let rows = residual.len();
    let sb = beta.sqrt();
    let res = DVector::from_fn(rows + n, |i, _| if i < rows { residual[i] } else { sb * (sigma[i - rows] - xi[i - rows]) });
    let mut jac = DMatrix::zeros(rows + n, n);
    jac.view_mut((0, 0), (rows, n)).copy_from(jacobian);
    for i in 0..n {
        jac[(rows + i, i)] = sb;
    }
    Ok(AugmentedSystem { residual: res, jacobian: jac, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{DevicePreset, LayerGeometry};
    use nalgebra::dmatrix;

    fn gem2(n: usize) -> ForwardOperator<f64> {
        ForwardOperator::new(DevicePreset::Gem2.config(&[1.0]).unwrap(), LayerGeometry::uniform(n, 5.0).unwrap(), 1e-8)
            .unwrap()
    }

    #[test]
    fn residual_of_exact_data_vanishes() {
        let op = gem2(5);
        let sigma = [0.1, 0.4, 0.2, 0.9, 0.3];
        let b = op.evaluate(&sigma).unwrap();
        assert!(stacked_residual(&op, &sigma, &b).unwrap().iter().all(|v| *v == 0.0));
        let shifted = b.map(|z| z + Complex::new(0.0, 0.25));
        let r = stacked_residual(&op, &sigma, &shifted).unwrap();
        assert!(r.rows(0, 12).iter().all(|v| *v == 0.0));
        assert!(r.rows(12, 12).iter().all(|v| (*v + 0.25).abs() < 1e-15));
    }

    #[test]
    fn residual_matches_complex_subtraction() {
        let op = gem2(4);
        let sigma = [0.3, 0.05, 0.6, 0.2];
        let b = DVector::from_fn(12, |i, _| Complex::new(0.001 * i as f64, -0.002 * i as f64));
        let r = stacked_residual(&op, &sigma, &b).unwrap();
        let m = op.evaluate(&sigma).unwrap();
        for i in 0..12 {
            assert_eq!(r[i], m[i].re - b[i].re);
            assert_eq!(r[12 + i], m[i].im - b[i].im);
        }
    }

    #[test]
    fn constant_map_has_zero_jacobian() {
        let j = fd_jacobian(|_: &[f64]| Ok(DVector::from_vec(vec![1.0, -2.0])), &[0.5, 0.0, 3.0]).unwrap();
        assert!(j.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn affine_map_jacobian_is_exact() {
        let a = dmatrix![1.0, -2.0, 0.5; 3.0, 0.25, -1.0];
        let f = |s: &[f64]| Ok(&a * DVector::from_column_slice(s) + DVector::from_vec(vec![0.1, 0.2]));
        let j = fd_jacobian(f, &[0.0, 0.7, 12.0]).unwrap();
        assert!((j - &a).amax() < 1e-8);
    }

    #[test]
    fn forward_difference_near_zero() {
        assert_eq!(fd_step(0.0), (1e-6, false));
        assert_eq!(fd_step(0.5), (1e-6, true));
        let (h, central) = fd_step(10.0f64);
        assert!((h - 1e-5).abs() < 1e-20 && central);
    }

    #[test]
    fn richardson_oracle_on_homogeneous_model() {
        let op = gem2(6);
        let sigma = [0.1; 6];
        let jac = op.stacked_jacobian(&sigma).unwrap();
        // Richardson extrapolation of central differences with steps h and h/2
        let h = 1e-3;
        for i in 0..6 {
            let diff = |step: f64| {
                let mut up = sigma;
                up[i] += step;
                let mut dn = sigma;
                dn[i] -= step;
                (op.stacked(&up).unwrap() - op.stacked(&dn).unwrap()) / (2.0 * step)
            };
            let oracle = (diff(h / 2.0) * 4.0 - diff(h)) / 3.0;
            let scale = oracle.amax();
            for r in 0..oracle.len() {
                let rel = (jac[(r, i)] - oracle[r]).abs() / scale;
                assert!(rel < 1e-4, "layer {i}, row {r}: {} vs {}", jac[(r, i)], oracle[r]);
            }
        }
    }

    #[test]
    fn augmentation_blocks() {
        let r = DVector::from_vec(vec![1.0, 2.0]);
        let j = dmatrix![1.0, 2.0; 3.0, 4.0];
        let sys = augment(&r, &j, &[0.5, 0.5], &[0.5, 0.5], 4.0).unwrap();
        assert_eq!(sys.residual.as_slice(), &[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(sys.jacobian.view((2, 0), (2, 2)).clone_owned(), dmatrix![2.0, 0.0; 0.0, 2.0]);
        assert_eq!(sys.data_rows(), 2);
        let tiny = augment(&r, &j, &[1.0, 0.0], &[0.0, 1.0], 1e-30).unwrap();
        assert!(tiny.residual.rows(2, 2).norm() < 1e-14);
        assert!(augment(&r, &j, &[0.0, 0.0], &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn augmented_norm_identity() {
        let mut state = 7u64;
        let mut rand = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for _ in 0..20 {
            let r = DVector::from_fn(8, |_, _| rand());
            let j = DMatrix::from_fn(8, 5, |_, _| rand());
            let sigma: Vec<f64> = (0..5).map(|_| rand()).collect();
            let xi: Vec<f64> = (0..5).map(|_| rand()).collect();
            let beta = rand().abs() * 10.0 + 1e-3;
            let sys = augment(&r, &j, &sigma, &xi, beta).unwrap();
            let d2: f64 = sigma.iter().zip(&xi).map(|(a, b)| (a - b) * (a - b)).sum();
            let want = r.norm_squared() + beta * d2;
            assert!((sys.residual.norm_squared() - want).abs() <= 1e-14 * want.max(1.0));
        }
    }
}
