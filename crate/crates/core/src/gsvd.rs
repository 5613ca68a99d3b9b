//! Generalized SVD of a matrix pair `(A, L)` and the truncated-GSVD step.
//!
//! With `A` of size `r x n` and `L` of size `p x n` the factorization is
//!
//! ```text
//! A = U diag(c) Z^-1,   L = V diag(s) Z^-1,   c_i^2 + s_i^2 = 1,
//! ```
//!
//! with `c` nondecreasing. Columns whose `s_i` vanish span the null space of
//! `L`; they come last and carry `c_i = 1`.
//!
//! The stacked matrix `[A; L]` is factored by an SVD into an orthonormal
//! `Q = [Q_A; Q_L]` times an invertible `n x n` factor, and the right
//! singular vectors `W` of `Q_A` split `Q` into the cosine/sine pair.

use nalgebra::{DMatrix, DVector};

use crate::error::{FdemError, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone)]
pub struct GsvdFactors<T: Real> {
    /// `r x n`; column `i` is `Q_A w_i / c_i` (zero where `c_i = 0`).
    pub u: DMatrix<T>,
    /// `p x n`; column `i` is `Q_L w_i / s_i` (zero where `s_i = 0`).
    pub v: DMatrix<T>,
    pub z: DMatrix<T>,
    pub z_inv: DMatrix<T>,
    pub c: DVector<T>,
    pub s: DVector<T>,
    /// Numerical rank of `A`.
    pub rank_a: usize,
    /// Dimension of the null space of `L`.
    pub null_l: usize,
    /// `Q_A W` = `U diag(c)`, kept to avoid dividing by small `c_i`.
    scaled_u: DMatrix<T>,
}

/// Rank tolerance on the stacked matrix, relative to its 2-norm.
const STACK_RANK_TOL: f64 = 1e-12;

pub fn gsvd<T: Real>(a: &DMatrix<T>, lhat: &DMatrix<T>) -> Result<GsvdFactors<T>> {
    let (r, n) = a.shape();
    let p = lhat.nrows();
    if lhat.ncols() != n {
        return Err(FdemError::DimensionMismatch { expected: n, found: lhat.ncols() });
    }
    if n == 0 || r + p < n {
        return Err(FdemError::CommonNullspace);
    }
    if a.iter().chain(lhat.iter()).any(|v| !v.finite()) {
        return Err(FdemError::NonFinite("gsvd input"));
    }

    let mut stack = DMatrix::zeros(r + p, n);
    stack.rows_mut(0, r).copy_from(a);
    stack.rows_mut(r, p).copy_from(lhat);
    let svd = stack.svd(true, true);
    let sv0 = &svd.singular_values;
    let top = sv0.max();
    if !(top > T::zero()) || sv0.min() <= lit::<T>(STACK_RANK_TOL) * top {
        return Err(FdemError::CommonNullspace);
    }
    let q = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");

    // Q_A padded with zero rows so its SVD yields a full n x n right basis.
    let mut qa = DMatrix::zeros(r.max(n), n);
    qa.rows_mut(0, r).copy_from(&q.rows(0, r));
    let w_t = qa.svd(false, true).v_t.expect("requested");
    let mut w = w_t.transpose();

    let qa = q.rows(0, r).into_owned();
    let ql = q.rows(r, p).into_owned();
    let mut aw = &qa * &w;
    let mut lw = &ql * &w;

    // Sort ascending by c.
    let mut c: Vec<T> = aw.column_iter().map(|col| col.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| c[i].partial_cmp(&c[j]).unwrap_or(std::cmp::Ordering::Equal));
    w = DMatrix::from_fn(n, n, |i, j| w[(i, order[j])]);
    aw = DMatrix::from_fn(r, n, |i, j| aw[(i, order[j])]);
    lw = DMatrix::from_fn(p, n, |i, j| lw[(i, order[j])]);
    c = order.iter().map(|&i| c[i]).collect();
    let mut s: Vec<T> = lw.column_iter().map(|col| col.norm()).collect();
    for i in 0..n {
        let h = c[i].hypot(s[i]);
        c[i] /= h;
        s[i] /= h;
    }

    // With [A; L] = Q R and R = diag(sv) V^T: Z^-1 = W^T R, Z = R^-1 W.
    let sv = &svd.singular_values;
    let right = DMatrix::from_fn(n, n, |i, j| sv[i] * vt[(i, j)]);
    let z_inv = w.transpose() * &right;
    let z = DMatrix::from_fn(n, n, |i, j| vt[(j, i)] / sv[j]) * &w;

    let tiny = lit::<T>(1e4) * T::epsilon();
    let u = DMatrix::from_fn(r, n, |i, j| if c[j] > tiny { aw[(i, j)] / c[j] } else { T::zero() });
    let v = DMatrix::from_fn(p, n, |i, j| if s[j] > tiny { lw[(i, j)] / s[j] } else { T::zero() });
    let rank_a = c.iter().filter(|&&ci| ci > tiny).count();
    let null_l = n - lhat.clone().rank(lit::<T>(STACK_RANK_TOL) * lhat.norm());

    Ok(GsvdFactors {
        u,
        v,
        z,
        z_inv,
        c: DVector::from_vec(c),
        s: DVector::from_vec(s),
        rank_a,
        null_l,
        scaled_u: aw,
    })
}

impl<T: Real> GsvdFactors<T> {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Largest admissible truncation index `rank(A) - dim N(L)`.
    pub fn max_truncation(&self) -> usize {
        self.rank_a.saturating_sub(self.null_l)
    }

    pub fn reconstruct_a(&self) -> DMatrix<T> {
        &self.scaled_u * &self.z_inv
    }

    pub fn reconstruct_l(&self) -> DMatrix<T> {
        let n = self.n();
        DMatrix::from_fn(self.v.nrows(), n, |i, j| self.v[(i, j)] * self.s[j]) * &self.z_inv
    }
}

/// Truncated-GSVD Gauss–Newton step for residual `r`.
///
/// Keeps the null-space block of `L` plus the `ell` largest remaining
/// generalized singular values: `q = -sum_i (u_i^T r / c_i) z_i`.
pub fn tgsvd_step<T: Real>(f: &GsvdFactors<T>, r: &DVector<T>, ell: usize) -> Result<DVector<T>> {
    let max = f.max_truncation();
    if ell == 0 || ell > max {
        return Err(FdemError::TruncationOutOfRange { ell, max });
    }
    if r.len() != f.u.nrows() {
        return Err(FdemError::DimensionMismatch { expected: f.u.nrows(), found: r.len() });
    }
    let n = f.n();
    let mut q = DVector::zeros(n);
    for i in n - f.null_l - ell..n {
        let coef = f.scaled_u.column(i).dot(r) / (f.c[i] * f.c[i]);
        q.axpy(-coef, &f.z.column(i), T::one());
    }
    Ok(q)
}
