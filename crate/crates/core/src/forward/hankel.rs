//! Hankel transforms `H_nu[f](rho) = int_0^inf f(lambda) J_nu(rho lambda) lambda dlambda`.
//!
//! The half line is split at consecutive zeros of `J_nu(rho lambda)`, which
//! turns the oscillatory integral into an alternating series of panel
//! integrals. Each panel is integrated by composite Gauss–Legendre rules.

use num_complex::Complex;

use super::bessel::{bessel_j, bessel_zero, BesselOrder};
use super::quadrature::gauss_legendre;
use crate::error::{FdemError, Result};
use crate::scalar::{cabs, lit, Real};

/// Hard cap on the number of zero-to-zero panels.
pub const MAX_PANELS: usize = 400;

const BASE_ORDER: usize = 10;
const MAX_BISECTIONS: usize = 12;

/// Panel boundaries `0, j_1/rho, j_2/rho, ...` in `lambda`.
fn panel_edge<T: Real>(order: BesselOrder, rho: T, k: usize) -> T {
    if k == 0 {
        T::zero()
    } else {
        bessel_zero::<T>(order, k) / rho
    }
}

struct Rules<T> {
    coarse: (Vec<T>, Vec<T>),
    fine: (Vec<T>, Vec<T>),
}

impl<T: Real> Rules<T> {
    fn new() -> Self {
        let cast = |(x, w): (Vec<f64>, Vec<f64>)| {
            (x.into_iter().map(lit).collect(), w.into_iter().map(lit).collect())
        };
        Rules { coarse: cast(gauss_legendre(BASE_ORDER)), fine: cast(gauss_legendre(2 * BASE_ORDER)) }
    }
}

fn gauss<T: Real, F>(g: &mut F, rule: &(Vec<T>, Vec<T>), a: T, b: T) -> Result<Complex<T>>
where
    F: FnMut(T) -> Result<Complex<T>>,
{
    let half = (b - a) / lit(2.0);
    let mid = (a + b) / lit(2.0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, w) in rule.0.iter().zip(&rule.1) {
        acc += g(mid + half * *x)? * (*w * half);
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_panel<T: Real, F>(
    g: &mut F,
    rules: &Rules<T>,
    a: T,
    b: T,
    coarse: Complex<T>,
    scale: T,
    tol: T,
    depth: usize,
) -> Result<Complex<T>>
where
    F: FnMut(T) -> Result<Complex<T>>,
{
    let fine = gauss(g, &rules.fine, a, b)?;
    let err = cabs(fine - coarse);
    let floor = T::min_value().unwrap_or(T::zero());
    if err <= tol * scale.max(cabs(fine)) || err <= floor || depth >= MAX_BISECTIONS {
        return Ok(fine);
    }
    let mid = (a + b) / lit(2.0);
    let left = gauss(g, &rules.coarse, a, mid)?;
    let right = gauss(g, &rules.coarse, mid, b)?;
    let l = adaptive_panel(g, rules, a, mid, left, scale, tol, depth + 1)?;
    let r = adaptive_panel(g, rules, mid, b, right, scale, tol, depth + 1)?;
    Ok(l + r)
}

/// Adaptive Hankel transform of `f` to relative tolerance `tol`.
///
/// Panels are accumulated until two consecutive panel contributions fall
/// below `tol` times the running sum. Integrands that evaluate to exactly zero
/// terminate after two panels with a zero result.
pub fn hankel_transform<T: Real, F>(mut f: F, order: BesselOrder, rho: T, tol: T) -> Result<Complex<T>>
where
    F: FnMut(T) -> Result<Complex<T>>,
{
    if !(tol > T::zero()) || !(rho > T::zero()) {
        return Err(FdemError::InvalidParams("hankel transform needs rho > 0 and tol > 0".into()));
    }
    let rules = Rules::<T>::new();
    let mut g = |lambda: T| -> Result<Complex<T>> {
        let v = f(lambda)? * (bessel_j(order, rho * lambda) * lambda);
        if v.re.finite() && v.im.finite() {
            Ok(v)
        } else {
            Err(FdemError::NonFinite("Hankel integrand"))
        }
    };
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut small_in_a_row = 0;
    for k in 0..MAX_PANELS {
        let a = panel_edge(order, rho, k);
        let b = panel_edge(order, rho, k + 1);
        let coarse = gauss(&mut g, &rules.coarse, a, b)?;
        let panel = adaptive_panel(&mut g, &rules, a, b, coarse, cabs(sum), tol, 0)?;
        sum += panel;
        if cabs(panel) <= tol * cabs(sum) {
            small_in_a_row += 1;
        } else {
            small_in_a_row = 0;
        }
        if small_in_a_row >= 2 {
            return Ok(sum);
        }
    }
    Err(FdemError::NoConvergence { panels: MAX_PANELS })
}

/// Sub-panels of the first kernel period and their size ratio.
const GRADED_PANELS: usize = 8;
const GRADING_RATIO: f64 = 4.0;

/// A fixed quadrature rule for one Hankel kernel: nodes `lambda_k` and weights
/// that already include `J_nu(rho lambda_k) lambda_k`.
///
/// The rule covers `[0, cutoff]`, rounded up to the next zero of the kernel,
/// with `order` Gauss–Legendre points per panel. Being fixed, it makes the
/// discrete transform a smooth function of the integrand, which finite
/// differences rely on.
#[derive(Debug, Clone)]
pub struct HankelRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub panels: usize,
}

impl<T: Real> HankelRule<T> {
    pub fn new(order: BesselOrder, rho: T, cutoff: T, gl_order: usize) -> Result<Self> {
        Self::on_panels(order, order, rho, cutoff, gl_order)
    }

    /// Like [`HankelRule::new`] but with panels bounded by the zeros of
    /// `J_edges`, so rules for both kernels can share their nodes.
    pub fn on_panels(edges: BesselOrder, order: BesselOrder, rho: T, cutoff: T, gl_order: usize) -> Result<Self> {
        let (x, w) = gauss_legendre(gl_order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push = |a: T, b: T| {
            let half = (b - a) / lit(2.0);
            let mid = (a + b) / lit(2.0);
            for (xi, wi) in x.iter().zip(&w) {
                let lambda = mid + half * lit(*xi);
                nodes.push(lambda);
                weights.push(half * lit(*wi) * bessel_j(order, rho * lambda) * lambda);
            }
        };
        // The reflection factor turns over on the scale sqrt(sigma mu omega),
        // which can be far below the first kernel zero: grade that panel
        // geometrically towards the origin.
        let first = panel_edge(edges, rho, 1);
        let ratio: T = lit(GRADING_RATIO);
        let mut hi = first;
        for _ in 0..GRADED_PANELS {
            let lo = hi / ratio;
            push(lo, hi);
            hi = lo;
        }
        push(T::zero(), hi);
        let mut k = 1;
        loop {
            let a = panel_edge(edges, rho, k);
            if a >= cutoff {
                break;
            }
            if k >= MAX_PANELS {
                return Err(FdemError::NoConvergence { panels: MAX_PANELS });
            }
            push(a, panel_edge(edges, rho, k + 1));
            k += 1;
        }
        let k = k + GRADED_PANELS;
        Ok(HankelRule { nodes, weights, panels: k })
    }

    /// Applies the rule to integrand samples taken at `self.nodes`.
    pub fn apply(&self, samples: &[Complex<T>]) -> Complex<T> {
        self.weights
            .iter()
            .zip(samples)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (w, s)| acc + s * *w)
    }
}
