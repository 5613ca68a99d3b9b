use nalgebra::DMatrix;

use super::SolverParams;
use crate::error::{FdemError, Result};
use crate::regops::{dct_spectrum, Boundary, Dct2d, DctSpectrum, Lap2d};
use crate::scalar::{lit, Real};

/// `sum_j (x_j^2 + eps^2)^(q/2)`.
pub fn smoothed_lq<T: Real>(x: &[T], q: T, epsilon: T) -> T {
    let e2 = epsilon * epsilon;
    let half_q = q * lit(0.5);
    x.iter().fold(T::zero(), |acc, v| acc + (*v * *v + e2).powf(half_q))
}

/// `u = u~ (1 - ((u~^2 + eps^2) / eps^2)^(q/2 - 1))`, elementwise.
pub fn mm_u_update<T: Real>(utilde: &[T], q: T, epsilon: T) -> Vec<T> {
    let e2 = epsilon * epsilon;
    let expo = q * lit(0.5) - T::one();
    utilde.iter().map(|&t| t * (T::one() - ((t * t + e2) / e2).powf(expo))).collect()
}

/// Reflexive 2-D Laplacian together with its cosine-transform
/// diagonalization, built once per image size.
#[derive(Debug, Clone)]
pub struct XiSolver<T: Real> {
    pub lap: Lap2d,
    pub dct: Dct2d<T>,
    pub spectrum: DctSpectrum<T>,
}

/// Result of the inner MM loop.
#[derive(Debug, Clone)]
pub struct XiSolution<T: Real> {
    pub xi: DMatrix<T>,
    pub iterations: usize,
    /// Smoothed objective at the start and after every iteration.
    pub objective: Vec<T>,
}

impl<T: Real> XiSolver<T> {
    pub fn new(n: usize, big_n: usize) -> Result<Self> {
        Ok(XiSolver {
            lap: Lap2d::new(n, big_n, Boundary::Reflexive)?,
            dct: Dct2d::new(n, big_n)?,
            spectrum: dct_spectrum(n, big_n),
        })
    }

    fn check(&self, x: &DMatrix<T>) -> Result<()> {
        if x.shape() != (self.lap.n, self.lap.big_n) {
            return Err(FdemError::DimensionMismatch { expected: self.lap.len(), found: x.len() });
        }
        Ok(())
    }

    /// `1/2 ||xi - sigma||^2 + gamma/(q beta) sum((D xi)^2 + eps^2)^(q/2)`.
    pub fn objective(&self, xi: &DMatrix<T>, sigma: &DMatrix<T>, params: &SolverParams<T>) -> Result<T> {
        self.check(xi)?;
        let dxi = self.lap.apply(xi)?;
        let fit = (xi - sigma).norm_squared() * lit(0.5);
        Ok(fit + params.gamma / (params.q * params.beta) * smoothed_lq(dxi.as_slice(), params.q, params.epsilon))
    }

    /// Quadratic tangent majorant of [`Self::objective`] at `anchor`,
    /// evaluated at `xi`. The constant is fixed by matching at the anchor.
    pub fn majorant(&self, xi: &DMatrix<T>, anchor: &DMatrix<T>, sigma: &DMatrix<T>, params: &SolverParams<T>) -> Result<T> {
        let quad = |x: &DMatrix<T>, u: &[T]| -> Result<T> {
            let dx = self.lap.apply(x)?;
            let cross = dx.iter().zip(u).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
            let w = params.gamma * params.epsilon.powf(params.q - lit(2.0)) / (params.beta + params.beta);
            Ok((x - sigma).norm_squared() * lit(0.5) + w * (dx.norm_squared() - cross - cross))
        };
        let u = mm_u_update(self.lap.apply(anchor)?.as_slice(), params.q, params.epsilon);
        let c = self.objective(anchor, sigma, params)? - quad(anchor, &u)?;
        Ok(quad(xi, &u)? + c)
    }

    /// One MM update: the exact minimizer of the majorant at `xi`,
    /// `C^T (I + eta Lambda^2)^-1 C (sigma + eta D u)`.
    pub fn step(&self, xi: &DMatrix<T>, sigma: &DMatrix<T>, params: &SolverParams<T>) -> Result<DMatrix<T>> {
        self.check(xi)?;
        self.check(sigma)?;
        let eta = params.eta();
        let u = mm_u_update(self.lap.apply(xi)?.as_slice(), params.q, params.epsilon);
        let du = self.lap.apply_slice(&u)?;
        let rhs = DMatrix::from_fn(sigma.nrows(), sigma.ncols(), |i, j| {
            sigma[(i, j)] + eta * du[i + j * sigma.nrows()]
        });
        self.solve_shifted(&rhs, eta)
    }

    /// `(I + eta D^T D)^-1 rhs` through the cosine transform.
    pub fn solve_shifted(&self, rhs: &DMatrix<T>, eta: T) -> Result<DMatrix<T>> {
        let mut coef = self.dct.forward(rhs)?;
        for (c, l) in coef.iter_mut().zip(self.spectrum.eigenvalues.iter()) {
            *c /= T::one() + eta * *l * *l;
        }
        self.dct.inverse(&coef)
    }
}

/// Inner MM loop for the auxiliary image, started at `xi = sigma`.
pub fn mm_xi_solve<T: Real>(sigma: &DMatrix<T>, params: &SolverParams<T>, solver: &XiSolver<T>) -> Result<XiSolution<T>> {
    let mut xi = sigma.clone();
    let mut objective = vec![solver.objective(&xi, sigma, params)?];
    let mut iterations = 0;
    while iterations < params.mm_maxit {
        let next = solver.step(&xi, sigma, params)?;
        iterations += 1;
        let change = (&next - &xi).norm();
        let scale = xi.norm();
        xi = next;
        objective.push(solver.objective(&xi, sigma, params)?);
        if change <= params.rel_tol * scale {
            break;
        }
    }
    if xi.iter().any(|v| !v.finite()) {
        return Err(FdemError::NonFinite("auxiliary image"));
    }
    Ok(XiSolution { xi, iterations, objective })
}
