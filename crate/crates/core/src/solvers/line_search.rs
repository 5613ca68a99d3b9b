use serde::{Deserialize, Serialize};

use crate::error::{FdemError, Result};
use crate::scalar::{lit, to_f64, Real};

/// Everything needed to re-verify an accepted step after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepCertificate {
    /// `||r(sigma)||^2`.
    pub r0_sq: f64,
    /// `||r(sigma + alpha q)||^2`.
    pub r1_sq: f64,
    pub alpha: f64,
    /// `||J q||^2`.
    pub jq_sq: f64,
    /// `min(sigma + alpha q)`.
    pub min_sigma: f64,
}

impl StepCertificate {
    /// Sufficient decrease and positivity.
    pub fn holds(&self) -> bool {
        self.r0_sq - self.r1_sq >= 0.5 * self.alpha * self.jq_sq && self.min_sigma >= 0.0
    }
}

#[derive(Debug, Clone)]
pub struct AcceptedStep<T> {
    pub alpha: T,
    pub sigma: Vec<T>,
    pub r_sq: T,
    pub certificate: StepCertificate,
}

/// Backtracking over `alpha = 1, 1/2, 1/4, ...` down to `alpha_min`.
///
/// Accepts the first `alpha` with `sigma + alpha q >= 0` and
/// `||r(sigma)||^2 - ||r(sigma + alpha q)||^2 >= alpha/2 ||J q||^2`.
/// Trial points outside the nonnegative orthant are never evaluated.
pub fn armijo_positive<T: Real, F>(
    sigma: &[T],
    dir: &[T],
    r0_sq: T,
    jq_sq: T,
    alpha_min: T,
    mut residual_sq: F,
) -> Result<AcceptedStep<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    if dir.iter().any(|v| !v.finite()) {
        return Err(FdemError::NonFinite("search direction"));
    }
    let half: T = lit(0.5);
    let mut alpha = T::one();
    let mut trial = vec![T::zero(); sigma.len()];
    while alpha >= alpha_min {
        for ((t, s), d) in trial.iter_mut().zip(sigma).zip(dir) {
            *t = *s + alpha * *d;
        }
        let min = trial.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
        if min >= T::zero() {
            let r1 = residual_sq(&trial)?;
            if r1.finite() && r0_sq - r1 >= half * alpha * jq_sq {
                let certificate = StepCertificate {
                    r0_sq: to_f64(r0_sq),
                    r1_sq: to_f64(r1),
                    alpha: to_f64(alpha),
                    jq_sq: to_f64(jq_sq),
                    min_sigma: to_f64(min),
                };
                return Ok(AcceptedStep { alpha, sigma: trial, r_sq: r1, certificate });
            }
        }
        alpha *= half;
    }
    Err(FdemError::LineSearchFailed { alpha_min: to_f64(alpha_min) })
}
