//! Discrete Laplacians, derivative operators and the cosine-transform
//! diagonalization of the reflexive 2-D Laplacian.
//!
//! Images are `n x N` matrices (layers x soundings) vectorized column-major,
//! so the 2-D operator is `I_N (x) L_n + L_N (x) I_n`, i.e.
//! `D vec(X) = vec(L_n X + X L_N)`.

mod dct;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use dct::{dct_spectrum, Dct2d, DctSpectrum};

use crate::error::{FdemError, Result};
use crate::scalar::{lit, Real};

/// Boundary treatment of the second-difference stencil `[-1, 2, -1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Values outside the grid are zero: corner entries stay 2.
    Zero,
    /// Values are mirrored at the ends: corner entries become 1.
    Reflexive,
}

/// 1-D second-difference matrix.
#[derive(Debug, Clone)]
pub struct Lap1d<T: Real> {
    pub n: usize,
    pub boundary: Boundary,
    pub matrix: DMatrix<T>,
}

pub fn build_lap1d<T: Real>(n: usize, boundary: Boundary) -> Result<Lap1d<T>> {
    if n < 2 {
        return Err(FdemError::SizeTooSmall(n));
    }
    Ok(Lap1d { n, boundary, matrix: lap1d_dense(n, boundary) })
}

fn lap1d_dense<T: Real>(n: usize, boundary: Boundary) -> DMatrix<T> {
    let two: T = lit(2.0);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = two;
        if i > 0 {
            m[(i, i - 1)] = -T::one();
        }
        if i + 1 < n {
            m[(i, i + 1)] = -T::one();
        }
    }
    if boundary == Boundary::Reflexive {
        m[(0, 0)] -= T::one();
        m[(n - 1, n - 1)] -= T::one();
    }
    m
}

/// `y[k] = (L x)[k]` along a strided line of length `len`.
#[inline]
fn stencil<T: Real>(x: &[T], len: usize, stride: usize, offset: usize, boundary: Boundary, y: &mut [T], acc: bool) {
    let two: T = lit(2.0);
    for k in 0..len {
        let here = x[offset + k * stride];
        let mut v = two * here;
        if k > 0 {
            v -= x[offset + (k - 1) * stride];
        } else if boundary == Boundary::Reflexive {
            v -= here;
        }
        if k + 1 < len {
            v -= x[offset + (k + 1) * stride];
        } else if boundary == Boundary::Reflexive {
            v -= here;
        }
        let slot = &mut y[offset + k * stride];
        *slot = if acc { *slot + v } else { v };
    }
}

/// 2-D Laplacian on an `n x N` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lap2d {
    pub n: usize,
    pub big_n: usize,
    pub boundary: Boundary,
}

impl Lap2d {
    pub fn new(n: usize, big_n: usize, boundary: Boundary) -> Result<Self> {
        if n == 0 || big_n == 0 || n * big_n < 2 {
            return Err(FdemError::SizeTooSmall(n * big_n));
        }
        Ok(Lap2d { n, big_n, boundary })
    }

    pub fn len(&self) -> usize {
        self.n * self.big_n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matrix-free `D x` for column-major `x` of length `n N`.
    pub fn apply_slice<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(FdemError::DimensionMismatch { expected: self.len(), found: x.len() });
        }
        let mut y = vec![T::zero(); x.len()];
        for j in 0..self.big_n {
            stencil(x, self.n, 1, j * self.n, self.boundary, &mut y, false);
        }
        for i in 0..self.n {
            stencil(x, self.big_n, self.n, i, self.boundary, &mut y, true);
        }
        Ok(y)
    }

    /// `D vec(X)` reshaped to the grid, i.e. `L_n X + X L_N`.
    pub fn apply<T: Real>(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        if x.nrows() != self.n || x.ncols() != self.big_n {
            return Err(FdemError::DimensionMismatch { expected: self.len(), found: x.len() });
        }
        Ok(DMatrix::from_vec(self.n, self.big_n, self.apply_slice(x.as_slice())?))
    }

    /// Dense `nN x nN` matrix (tests and small oracles only).
    pub fn dense<T: Real>(&self) -> DMatrix<T> {
        let ln: DMatrix<T> = lap1d_sized(self.n, self.boundary);
        let lbig: DMatrix<T> = lap1d_sized(self.big_n, self.boundary);
        DMatrix::<T>::identity(self.big_n, self.big_n).kronecker(&ln)
            + lbig.kronecker(&DMatrix::<T>::identity(self.n, self.n))
    }
}

/// Like [`lap1d_dense`] but tolerating a single point.
fn lap1d_sized<T: Real>(n: usize, boundary: Boundary) -> DMatrix<T> {
    if n == 1 {
        let v = match boundary {
            Boundary::Zero => lit(2.0),
            Boundary::Reflexive => T::zero(),
        };
        return DMatrix::from_element(1, 1, v);
    }
    lap1d_dense(n, boundary)
}

/// Discrete derivative operator of order `p` used as the GSVD partner matrix.
#[derive(Debug, Clone)]
pub struct DerivOp<T: Real> {
    pub order: usize,
    pub matrix: DMatrix<T>,
}

/// Forward-difference operator of order `p` in {0, 1, 2}, shape `(n - p) x n`.
pub fn build_deriv<T: Real>(p: usize, n: usize) -> Result<DerivOp<T>> {
    if p > 2 || n <= p {
        return Err(FdemError::BadOrder { order: p, n });
    }
    let stencil: &[f64] = match p {
        0 => &[1.0],
        1 => &[-1.0, 1.0],
        _ => &[1.0, -2.0, 1.0],
    };
    let mut m = DMatrix::zeros(n - p, n);
    for i in 0..n - p {
        for (k, c) in stencil.iter().enumerate() {
            m[(i, i + k)] = lit(*c);
        }
    }
    Ok(DerivOp { order: p, matrix: m })
}

impl<T: Real> DerivOp<T> {
    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.matrix * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn one_dimensional_stencils() {
        let z: Lap1d<f64> = build_lap1d(3, Boundary::Zero).unwrap();
        assert_eq!(z.matrix, dmatrix![2.0, -1.0, 0.0; -1.0, 2.0, -1.0; 0.0, -1.0, 2.0]);
        let r: Lap1d<f64> = build_lap1d(3, Boundary::Reflexive).unwrap();
        assert_eq!(r.matrix, dmatrix![1.0, -1.0, 0.0; -1.0, 2.0, -1.0; 0.0, -1.0, 1.0]);
        assert_eq!(&r.matrix * DVector::from_element(3, 1.0), DVector::zeros(3));
        assert_eq!(r.matrix, r.matrix.transpose());
        assert!(matches!(build_lap1d::<f64>(1, Boundary::Zero), Err(FdemError::SizeTooSmall(1))));
    }

    #[test]
    fn matrix_free_equals_dense() {
        for bc in [Boundary::Zero, Boundary::Reflexive] {
            let d = Lap2d::new(8, 8, bc).unwrap();
            let x = pseudo_random(64, 3);
            let dense: DMatrix<f64> = d.dense();
            let want = &dense * DVector::from_vec(x.clone());
            let got = d.apply_slice(&x).unwrap();
            for (a, b) in got.iter().zip(want.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let d = Lap2d::new(5, 7, Boundary::Reflexive).unwrap();
        let x = DMatrix::from_vec(5, 7, pseudo_random(35, 9));
        let ln: DMatrix<f64> = lap1d_dense(5, Boundary::Reflexive);
        let l7: DMatrix<f64> = lap1d_dense(7, Boundary::Reflexive);
        assert!((d.apply(&x).unwrap() - (&ln * &x + &x * &l7)).amax() < 1e-12);
    }

    #[test]
    fn reflexive_annihilates_constants_and_is_linear() {
        let d = Lap2d::new(6, 9, Boundary::Reflexive).unwrap();
        assert!(d.apply_slice(&[0.37; 54]).unwrap().iter().all(|v| *v == 0.0));
        let x = pseudo_random(54, 1);
        let y = pseudo_random(54, 2);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let lhs = d.apply_slice(&combo).unwrap();
        let dx = d.apply_slice(&x).unwrap();
        let dy = d.apply_slice(&y).unwrap();
        for k in 0..54 {
            assert!((lhs[k] - (2.0 * dx[k] - 3.0 * dy[k])).abs() < 1e-14);
        }
        assert!(d.apply_slice(&[0.0; 10]).is_err());
    }

    #[test]
    fn zero_boundary_is_positive_definite() {
        let d = Lap2d::new(6, 6, Boundary::Zero).unwrap();
        let eig = d.dense::<f64>().symmetric_eigenvalues();
        let smallest = eig.min();
        let s = (std::f64::consts::PI / 14.0).sin();
        assert!((smallest - 8.0 * s * s).abs() < 1e-12);
        let r = Lap2d::new(6, 6, Boundary::Reflexive).unwrap();
        let eig = r.dense::<f64>().symmetric_eigenvalues();
        assert_eq!(eig.iter().filter(|v| v.abs() < 1e-10).count(), 1);
    }

    #[test]
    fn single_sounding_grid() {
        let d = Lap2d::new(4, 1, Boundary::Reflexive).unwrap();
        let x = [1.0, 2.0, 4.0, 8.0];
        let dense: DMatrix<f64> = d.dense();
        let want = dense * DVector::from_row_slice(&x);
        assert_eq!(d.apply_slice(&x).unwrap(), want.as_slice());
    }

    #[test]
    fn derivative_operators() {
        let p0: DerivOp<f64> = build_deriv(0, 4).unwrap();
        assert_eq!(p0.matrix, DMatrix::identity(4, 4));
        let p1: DerivOp<f64> = build_deriv(1, 5).unwrap();
        assert_eq!(p1.matrix.shape(), (4, 5));
        assert_eq!(p1.apply(&DVector::from_element(5, 2.5)), DVector::zeros(4));
        let p2: DerivOp<f64> = build_deriv(2, 6).unwrap();
        let ramp = DVector::from_fn(6, |i, _| 0.5 + 1.5 * i as f64);
        assert!(p2.apply(&ramp).amax() < 1e-14);
        assert_eq!(p2.matrix.rank(1e-12), 4);
        assert!(matches!(build_deriv::<f64>(3, 6), Err(FdemError::BadOrder { .. })));
        assert!(build_deriv::<f64>(2, 2).is_err());
    }
}
