//! Production evaluation of the forward map for a fixed device and geometry.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::hankel::HankelRule;
use super::{
    admittance_step, mu0, propagation_constant, scaled_reflection, tanh_guarded, BesselOrder, DeviceConfig,
    LayerGeometry, Readings,
};
use crate::error::{FdemError, Result};
use crate::jacobian::fd_step;
use crate::scalar::{cabs, lit, Real};

/// Gauss–Legendre points per zero-to-zero panel.
const PANEL_ORDER: usize = 10;

/// Forward map `sigma -> M(sigma)` of one sounding for a fixed instrument and
/// layer geometry.
///
/// One pair of fixed Hankel rules (both orientations, on shared nodes) is
/// built per (coil distance, height); the cutoff is where the kernel envelope
/// `exp(-2 h lambda)` has decayed below `tol / 100`. The rules carry the
/// prefactor `-rho^(3-nu)` and the kernel `lambda^(1-nu) exp(-2 h lambda)`
/// in their weights.
#[derive(Debug, Clone)]
pub struct ForwardOperator<T> {
    device: DeviceConfig<T>,
    geometry: LayerGeometry<T>,
    /// Indexed by `t * m_h + l`; `[J0 rule, J1 rule]` on the same nodes.
    rules: Vec<[HankelRule<T>; 2]>,
    tol: T,
}

/// Per-node scratch space for the sensitivity kernel.
struct Scratch<T> {
    n_hat: Vec<Complex<T>>,
    tanh: Vec<Complex<T>>,
    below: Vec<Complex<T>>,
    prefix: Vec<[Complex<T>; 4]>,
}

impl<T: Real> ForwardOperator<T> {
    pub fn new(device: DeviceConfig<T>, geometry: LayerGeometry<T>, tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return Err(FdemError::InvalidParams("quadrature tolerance must be positive".into()));
        }
        if geometry.n_layers() == 0 || geometry.thickness.len() + 1 != geometry.n_layers() {
            return Err(FdemError::InvalidModel("geometry needs n permeabilities and n - 1 thicknesses".into()));
        }
        let envelope = (lit::<T>(100.0) / tol).ln();
        let mut rules = Vec::new();
        for &rho in device.rho() {
            for &h in device.heights() {
                let cutoff = envelope / (h + h);
                let pair = [BesselOrder::J0, BesselOrder::J1].map(|order| {
                    let mut rule = HankelRule::on_panels(BesselOrder::J0, order, rho, cutoff, PANEL_ORDER)?;
                    let power = match order {
                        BesselOrder::J0 => rho * rho * rho,
                        BesselOrder::J1 => rho * rho,
                    };
                    for (w, l) in rule.weights.iter_mut().zip(&rule.nodes) {
                        let kernel = match order {
                            BesselOrder::J0 => *l,
                            BesselOrder::J1 => T::one(),
                        };
                        *w = -power * *w * kernel * (-(h + h) * *l).exp();
                    }
                    Ok(rule)
                });
                let [a, b] = pair;
                rules.push([a?, b?]);
            }
        }
        Ok(ForwardOperator { device, geometry, rules, tol })
    }

    pub fn device(&self) -> &DeviceConfig<T> {
        &self.device
    }

    pub fn geometry(&self) -> &LayerGeometry<T> {
        &self.geometry
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn n_layers(&self) -> usize {
        self.geometry.n_layers()
    }

    pub fn n_readings(&self) -> usize {
        self.device.n_readings()
    }

    /// Total number of quadrature nodes per frequency.
    pub fn n_nodes(&self) -> usize {
        self.rules.iter().map(|r| r[0].nodes.len()).sum()
    }

    /// First reading row of rule group `g` for each orientation.
    fn rows(&self, g: usize) -> (usize, usize) {
        let mw = self.device.omegas().len();
        let per_orientation = self.rules.len() * mw;
        (g * mw, per_orientation + g * mw)
    }

    fn check(&self, sigma: &[T]) -> Result<()> {
        if sigma.len() != self.n_layers() {
            return Err(FdemError::DimensionMismatch { expected: self.n_layers(), found: sigma.len() });
        }
        if sigma.iter().any(|s| !(*s >= T::zero()) || !s.finite()) {
            return Err(FdemError::InvalidModel("conductivities must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Predicted readings `M(sigma)` in device order.
    pub fn evaluate(&self, sigma: &[T]) -> Result<Readings<T>> {
        self.check(sigma)?;
        let mu = &self.geometry.mu;
        let d = &self.geometry.thickness;
        let mut out = DVector::from_element(self.n_readings(), Complex::new(T::zero(), T::zero()));
        for (g, [r0, r1]) in self.rules.iter().enumerate() {
            let (row0, row1) = self.rows(g);
            for (s, &omega) in self.device.omegas().iter().enumerate() {
                let mut acc0 = Complex::new(T::zero(), T::zero());
                let mut acc1 = acc0;
                for ((&lambda, &w0), &w1) in r0.nodes.iter().zip(&r0.weights).zip(&r1.weights) {
                    let y = super::scaled_surface_admittance(lambda, omega, sigma, mu, d);
                    let r = scaled_reflection(Complex::new(lambda / mu0::<T>(), T::zero()), y)?;
                    acc0 += r * w0;
                    acc1 += r * w1;
                }
                out[row0 + s] = acc0;
                out[row1 + s] = acc1;
            }
        }
        Ok(out)
    }

    /// Finite-difference Jacobian `dM/dsigma` (complex, `m x n`).
    ///
    /// Column `i` is the central difference of the forward map with step
    /// [`fd_step`]; a forward difference is used where the backward point
    /// would leave the nonnegative orthant. Perturbing layer `i` only changes
    /// that layer's admittance step, so the admittances below it are reused
    /// and the layers above are applied as a precomposed Möbius map.
    pub fn jacobian(&self, sigma: &[T]) -> Result<DMatrix<Complex<T>>> {
        self.check(sigma)?;
        let n = self.n_layers();
        let steps: Vec<(T, bool)> = sigma.iter().map(|s| fd_step(*s)).collect();
        let mut jac = DMatrix::from_element(self.n_readings(), n, Complex::new(T::zero(), T::zero()));
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = Scratch {
            n_hat: vec![zero; n],
            tanh: vec![zero; n],
            below: vec![zero; n],
            prefix: vec![[zero; 4]; n],
        };
        let mut dr = vec![zero; n];
        for (g, [r0, r1]) in self.rules.iter().enumerate() {
            let (row0, row1) = self.rows(g);
            for (s, &omega) in self.device.omegas().iter().enumerate() {
                for ((&lambda, &w0), &w1) in r0.nodes.iter().zip(&r0.weights).zip(&r1.weights) {
                    self.node_sensitivity(lambda, omega, sigma, &steps, &mut scratch, &mut dr)?;
                    for (i, v) in dr.iter().enumerate() {
                        jac[(row0 + s, i)] += *v * w0;
                        jac[(row1 + s, i)] += *v * w1;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Difference quotients of `R(lambda)` with respect to every layer.
    fn node_sensitivity(
        &self,
        lambda: T,
        omega: T,
        sigma: &[T],
        steps: &[(T, bool)],
        sc: &mut Scratch<T>,
        out: &mut [Complex<T>],
    ) -> Result<()> {
        let n = sigma.len();
        let mu = &self.geometry.mu;
        let d = &self.geometry.thickness;
        let n0_hat = Complex::new(lambda / mu0::<T>(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());

        for i in 0..n {
            let u = propagation_constant(lambda, sigma[i], mu[i], omega);
            sc.n_hat[i] = u / mu[i];
            sc.tanh[i] = if i + 1 < n { tanh_guarded(u * d[i]) } else { zero };
        }
        // below[i]: scaled admittance at the top of layer i + 1 (unused for the last layer)
        let mut y = sc.n_hat[n - 1];
        for i in (0..n.saturating_sub(1)).rev() {
            sc.below[i] = y;
            y = admittance_step(sc.n_hat[i], sc.tanh[i], y);
        }
        let y1 = y;
        // prefix[i] maps the admittance at the top of layer i to the surface
        let mut p = [one, zero, zero, one];
        for i in 0..n {
            sc.prefix[i] = p;
            if i + 1 < n {
                let (nh, t) = (sc.n_hat[i], sc.tanh[i]);
                let m = [nh, nh * nh * t, t, nh];
                p = [p[0] * m[0] + p[1] * m[2], p[0] * m[1] + p[1] * m[3], p[2] * m[0] + p[3] * m[2], p[2] * m[1] + p[3] * m[3]];
                let scale = p.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)));
                if scale > T::zero() {
                    for z in p.iter_mut() {
                        *z /= scale;
                    }
                }
            }
        }

        let surface = |i: usize, s_i: T| -> Complex<T> {
            let u = propagation_constant(lambda, s_i, mu[i], omega);
            let nh = u / mu[i];
            let yi = if i + 1 < n { admittance_step(nh, tanh_guarded(u * d[i]), sc.below[i]) } else { nh };
            let p = &sc.prefix[i];
            (p[0] * yi + p[1]) / (p[2] * yi + p[3])
        };

        for i in 0..n {
            let (h, central) = steps[i];
            let plus = scaled_reflection(n0_hat, surface(i, sigma[i] + h))?;
            out[i] = if central {
                let minus = scaled_reflection(n0_hat, surface(i, sigma[i] - h))?;
                (plus - minus) / (h + h)
            } else {
                let base = scaled_reflection(n0_hat, y1)?;
                (plus - base) / h
            };
        }
        Ok(())
    }
}
