use std::sync::Arc;

use nalgebra::DMatrix;
use rustdct::{DctPlanner, TransformType2And3};

use super::{Boundary, Lap2d};
use crate::error::{FdemError, Result};
use crate::scalar::{from_usize, lit, Real};

/// Eigenvalues of the reflexive 2-D Laplacian in cosine-transform order,
/// stored as an `n x N` grid.
#[derive(Debug, Clone)]
pub struct DctSpectrum<T: Real> {
    pub n: usize,
    pub big_n: usize,
    pub eigenvalues: DMatrix<T>,
}

/// `Lambda[k1, k2] = 4 sin^2(k1 pi / 2n) + 4 sin^2(k2 pi / 2N)`.
pub fn dct_spectrum<T: Real>(n: usize, big_n: usize) -> DctSpectrum<T> {
    let axis = |len: usize| -> Vec<T> {
        (0..len)
            .map(|k| {
                let s = (from_usize::<T>(k) * T::pi() / from_usize::<T>(2 * len)).sin();
                lit::<T>(4.0) * s * s
            })
            .collect()
    };
    let (a, b) = (axis(n), axis(big_n));
    DctSpectrum { n, big_n, eigenvalues: DMatrix::from_fn(n, big_n, |i, j| a[i] + b[j]) }
}

impl<T: Real> DctSpectrum<T> {
    /// The same spectrum obtained as the ratio of the cosine transforms of
    /// the first column of `D` and of the first unit vector.
    pub fn from_first_column(dct: &Dct2d<T>) -> Result<Self> {
        let lap = Lap2d::new(dct.n, dct.big_n, Boundary::Reflexive)?;
        let mut e1 = DMatrix::zeros(dct.n, dct.big_n);
        e1[(0, 0)] = T::one();
        let col = lap.apply(&e1)?;
        let num = dct.forward(&col)?;
        let den = dct.forward(&e1)?;
        Ok(DctSpectrum { n: dct.n, big_n: dct.big_n, eigenvalues: num.component_div(&den) })
    }
}

/// Orthonormal 2-D cosine transform (type II forward, type III inverse) on
/// `n x N` grids.
#[derive(Clone)]
pub struct Dct2d<T: Real> {
    pub n: usize,
    pub big_n: usize,
    depth: Arc<dyn TransformType2And3<T>>,
    across: Arc<dyn TransformType2And3<T>>,
}

impl<T: Real> std::fmt::Debug for Dct2d<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dct2d").field("n", &self.n).field("big_n", &self.big_n).finish()
    }
}

impl<T: Real> Dct2d<T> {
    pub fn new(n: usize, big_n: usize) -> Result<Self> {
        if n == 0 || big_n == 0 {
            return Err(FdemError::SizeTooSmall(n * big_n));
        }
        let mut planner = DctPlanner::new();
        Ok(Dct2d { n, big_n, depth: planner.plan_dct2(n), across: planner.plan_dct2(big_n) })
    }

    fn check(&self, x: &DMatrix<T>) -> Result<()> {
        if x.nrows() != self.n || x.ncols() != self.big_n {
            return Err(FdemError::DimensionMismatch { expected: self.n * self.big_n, found: x.len() });
        }
        Ok(())
    }

    /// `C x`.
    pub fn forward(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.check(x)?;
        let mut out = x.clone();
        self.lines(&mut out, true);
        Ok(out)
    }

    /// `C^T x`.
    pub fn inverse(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        self.check(x)?;
        let mut out = x.clone();
        self.lines(&mut out, false);
        Ok(out)
    }

    fn lines(&self, grid: &mut DMatrix<T>, forward: bool) {
        let (n, big_n) = (self.n, self.big_n);
        let mut buf = vec![T::zero(); n.max(big_n)];
        for j in 0..big_n {
            let col = &mut buf[..n];
            col.copy_from_slice(grid.column(j).as_slice());
            transform(&*self.depth, col, forward);
            grid.column_mut(j).copy_from_slice(col);
        }
        for i in 0..n {
            let row = &mut buf[..big_n];
            for (j, v) in row.iter_mut().enumerate() {
                *v = grid[(i, j)];
            }
            transform(&*self.across, row, forward);
            for (j, v) in row.iter().enumerate() {
                grid[(i, j)] = *v;
            }
        }
    }
}

/// Orthonormally scaled DCT-II (`forward`) or DCT-III in place.
fn transform<T: Real>(plan: &dyn TransformType2And3<T>, x: &mut [T], forward: bool) {
    let len = x.len();
    let first = (T::one() / from_usize::<T>(len)).sqrt();
    let rest = (lit::<T>(2.0) / from_usize::<T>(len)).sqrt();
    if forward {
        plan.process_dct2(x);
        x[0] *= first;
        for v in x[1..].iter_mut() {
            *v *= rest;
        }
    } else {
        x[0] *= first + first;
        for v in x[1..].iter_mut() {
            *v *= rest;
        }
        plan.process_dct3(x);
    }
}
