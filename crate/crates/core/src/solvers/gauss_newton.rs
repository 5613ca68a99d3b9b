use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::line_search::{armijo_positive, StepCertificate};
use crate::error::{FdemError, Result};
use crate::gsvd::{gsvd, tgsvd_step};
use crate::jacobian::{augment, StackedForward};
use crate::scalar::{lit, to_f64, Real};

/// Pull of the column solve towards the auxiliary image column.
#[derive(Debug, Clone, Copy)]
pub enum Coupling<'a, T> {
    /// Plain data fit (decoupled baseline).
    None,
    /// Adds `beta/2 ||sigma - xi||^2`.
    To { xi: &'a [T], beta: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    SmallChange,
    /// The TGSVD step vanished.
    Stationary,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct ColumnSolution<T> {
    pub sigma: Vec<T>,
    pub iterations: usize,
    pub steps: Vec<StepCertificate>,
    /// Truncation index actually used (clamped to the admissible range).
    pub ell: usize,
    pub stop: StopReason,
}

/// Damped Gauss–Newton with truncated-GSVD steps and a positivity-preserving
/// Armijo search for one sounding.
///
/// `data` is the stacked observation `[Re b; Im b]`, `lhat` the partner
/// operator of the GSVD. Iterates never leave the nonnegative orthant; if
/// the line search fails the last iterate is returned.
#[allow(clippy::too_many_arguments)]
pub fn gn_column_solve<T: Real, F: StackedForward<T> + ?Sized>(
    forward: &F,
    data: &DVector<T>,
    start: &[T],
    coupling: Coupling<'_, T>,
    lhat: &DMatrix<T>,
    ell: usize,
    maxit: usize,
    rel_tol: T,
    alpha_min: T,
) -> Result<ColumnSolution<T>> {
    let n = forward.n_params();
    if start.len() != n || lhat.ncols() != n {
        return Err(FdemError::DimensionMismatch { expected: n, found: start.len() });
    }
    if data.len() != forward.n_outputs() {
        return Err(FdemError::DimensionMismatch { expected: forward.n_outputs(), found: data.len() });
    }
    if let Coupling::To { xi, .. } = coupling {
        if xi.len() != n {
            return Err(FdemError::DimensionMismatch { expected: n, found: xi.len() });
        }
    }
    if start.iter().any(|s| !(*s >= T::zero())) {
        return Err(FdemError::InvalidModel("starting conductivity must be nonnegative".into()));
    }

    let objective = |s: &[T]| -> Result<T> {
        let r = forward.stacked(s)? - data;
        let mut total = r.norm_squared();
        if let Coupling::To { xi, beta } = coupling {
            total += beta * s.iter().zip(xi).fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b));
        }
        Ok(total)
    };

    let mut sigma = start.to_vec();
    let mut steps = Vec::new();
    let mut used_ell = ell;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    while iterations < maxit {
        let residual = forward.stacked(&sigma)? - data;
        let jacobian = forward.stacked_jacobian(&sigma)?;
        let (r, jac) = match coupling {
            Coupling::None => (residual, jacobian),
            Coupling::To { xi, beta } => {
                let sys = augment(&residual, &jacobian, &sigma, xi, beta)?;
                (sys.residual, sys.jacobian)
            }
        };
        let Some((q, kept)) = bounded_step(&jac, lhat, &r, &sigma, ell)? else {
            stop = StopReason::Stationary;
            break;
        };
        used_ell = kept;
        let jq_sq = (&jac * &q).norm_squared();
        if !(jq_sq > T::zero()) {
            stop = StopReason::Stationary;
            break;
        }
        let step = match armijo_positive(&sigma, q.as_slice(), r.norm_squared(), jq_sq, alpha_min, objective) {
            Ok(step) => step,
            Err(FdemError::LineSearchFailed { .. }) => {
                stop = StopReason::LineSearchFailed;
                break;
            }
            Err(e) => return Err(e),
        };
        iterations += 1;
        steps.push(step.certificate);
        let change = step.sigma.iter().zip(&sigma).fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b)).sqrt();
        let scale = sigma.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt();
        sigma = step.sigma;
        if change <= rel_tol * scale {
            stop = StopReason::SmallChange;
            break;
        }
    }
    Ok(ColumnSolution { sigma, iterations, steps, ell: used_ell, stop })
}

/// A layer whose step would stop the line search below this `alpha` is held
/// at its current value for the iteration.
const BLOCKING_ALPHA: f64 = 1.0 / 16.0;

/// TGSVD step restricted to the layers that are not pinned against zero.
///
/// Layers sitting near the bound with a step pointing further down would cut
/// every trial step to a sliver; they are dropped from the factorization one
/// round at a time until the remaining step is free to move. Returns `None`
/// when no layer is left or no direction survives truncation.
fn bounded_step<T: Real>(
    jac: &DMatrix<T>,
    lhat: &DMatrix<T>,
    r: &DVector<T>,
    sigma: &[T],
    ell: usize,
) -> Result<Option<(DVector<T>, usize)>> {
    let n = sigma.len();
    let ratio: T = lit(BLOCKING_ALPHA);
    let mut free: Vec<usize> = (0..n).collect();
    loop {
        if free.is_empty() {
            return Ok(None);
        }
        let (q_free, kept) = if free.len() == n {
            let factors = gsvd(jac, lhat)?;
            let kept = ell.min(factors.max_truncation());
            if kept == 0 {
                return Ok(None);
            }
            (tgsvd_step(&factors, r, kept)?, kept)
        } else {
            let a = jac.select_columns(&free);
            let l = lhat.select_columns(&free);
            let factors = gsvd(&a, &l)?;
            let kept = ell.min(factors.max_truncation());
            if kept == 0 {
                return Ok(None);
            }
            (tgsvd_step(&factors, r, kept)?, kept)
        };
        let mut q = DVector::zeros(n);
        for (k, &i) in free.iter().enumerate() {
            q[i] = q_free[k];
        }
        let before = free.len();
        free.retain(|&i| !(q[i] < T::zero() && sigma[i] < -q[i] * ratio));
        if free.len() == before {
            return Ok(Some((q, kept)));
        }
    }
}

impl<T: Real> ColumnSolution<T> {
    pub fn alphas(&self) -> Vec<f64> {
        self.steps.iter().map(|c| c.alpha).collect()
    }

    pub fn final_min(&self) -> f64 {
        self.sigma.iter().map(|v| to_f64(*v)).fold(f64::INFINITY, f64::min)
    }
}
