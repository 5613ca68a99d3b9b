//! Layered-earth forward model of a two-coil frequency-domain EMI instrument.
//!
//! For one sounding the ground is a stack of `n` homogeneous layers; the
//! instrument reads the complex ratio of secondary to primary magnetic field
//! for each coil orientation, coil distance, height and frequency.

mod bessel;
mod device;
mod hankel;
mod operator;
mod quadrature;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, bessel_j0, bessel_j0_j1, bessel_j1, bessel_zero, BesselOrder};
pub use device::{DeviceConfig, DevicePreset, Setting};
pub use hankel::{hankel_transform, HankelRule, MAX_PANELS};
pub use operator::ForwardOperator;
pub use quadrature::gauss_legendre;

use crate::error::{FdemError, Result};
use crate::scalar::{from_usize, lit, Real};

/// Magnetic permeability of free space, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// `Re(d u) > TANH_SATURATION` replaces `tanh(d u)` by one.
pub const TANH_SATURATION: f64 = 30.0;

/// Relative tolerance of the production quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

pub fn mu0<T: Real>() -> T {
    lit(MU0)
}

/// Complex readings of one sounding, in device order.
pub type Readings<T> = DVector<Complex<T>>;

/// Conductivities, permeabilities and thicknesses of one sounding.
///
/// The last layer is a half-space, so there is one thickness fewer than
/// layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredModel<T> {
    sigma: Vec<T>,
    mu: Vec<T>,
    thickness: Vec<T>,
}

impl<T: Real> LayeredModel<T> {
    pub fn new(sigma: Vec<T>, mu: Vec<T>, thickness: Vec<T>) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(FdemError::InvalidModel("no layers".into()));
        }
        if mu.len() != n || thickness.len() + 1 != n {
            return Err(FdemError::InvalidModel(format!(
                "{n} conductivities need {n} permeabilities and {} thicknesses, got {} and {}",
                n - 1,
                mu.len(),
                thickness.len()
            )));
        }
        if sigma.iter().any(|s| !(*s >= T::zero()) || !s.finite()) {
            return Err(FdemError::InvalidModel("conductivities must be finite and nonnegative".into()));
        }
        if mu.iter().chain(&thickness).any(|x| !(*x > T::zero()) || !x.finite()) {
            return Err(FdemError::InvalidModel("permeabilities and thicknesses must be positive".into()));
        }
        Ok(LayeredModel { sigma, mu, thickness })
    }

    /// Layers of conductivity `sigma` in free-space permeability over `geometry`.
    pub fn with_geometry(sigma: Vec<T>, geometry: &LayerGeometry<T>) -> Result<Self> {
        Self::new(sigma, geometry.mu.clone(), geometry.thickness.clone())
    }

    pub fn n_layers(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn thickness(&self) -> &[T] {
        &self.thickness
    }
}

/// Layer permeabilities and thicknesses shared by every sounding of an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGeometry<T> {
    pub mu: Vec<T>,
    pub thickness: Vec<T>,
}

impl<T: Real> LayerGeometry<T> {
    /// `n` layers of free-space permeability; the first `n - 1` have thickness
    /// `depth / n`, the last one is a half-space.
    pub fn uniform(n: usize, depth: T) -> Result<Self> {
        if n == 0 || !(depth > T::zero()) {
            return Err(FdemError::InvalidModel("need n >= 1 and a positive depth".into()));
        }
        let d = depth / from_usize(n);
        Ok(LayerGeometry { mu: vec![mu0(); n], thickness: vec![d; n - 1] })
    }

    pub fn n_layers(&self) -> usize {
        self.mu.len()
    }

    /// Depth of the top of each layer.
    pub fn layer_tops(&self) -> Vec<T> {
        let mut tops = Vec::with_capacity(self.n_layers());
        let mut z = T::zero();
        tops.push(z);
        for d in &self.thickness {
            z += *d;
            tops.push(z);
        }
        tops
    }
}

/// Principal square root, `Re >= 0`.
#[inline]
pub(crate) fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let (a, b) = (z.re, z.im);
    if a == T::zero() && b == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let r = a.hypot(b);
    let half: T = lit(0.5);
    if a >= T::zero() {
        let t = ((r + a) * half).sqrt();
        Complex::new(t, b / (t + t))
    } else {
        let t = ((r - a) * half).sqrt();
        let im = if b < T::zero() { -t } else { t };
        Complex::new(b.abs() / (t + t), im)
    }
}

/// `tanh(z)` for `Re z >= 0`, saturating to one past [`TANH_SATURATION`].
#[inline]
pub(crate) fn tanh_guarded<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.re > lit(TANH_SATURATION) {
        return Complex::new(T::one(), T::zero());
    }
    let two: T = lit(2.0);
    let mag = (-two * z.re).exp();
    let (s, c) = (two * z.im).sin_cos();
    let e = Complex::new(mag * c, -mag * s);
    let one = Complex::new(T::one(), T::zero());
    (one - e) / (one + e)
}

/// `u = sqrt(lambda^2 + i sigma mu omega)` with `Re(u) >= 0`.
pub fn propagation_constant<T: Real>(lambda: T, sigma: T, mu: T, omega: T) -> Complex<T> {
    if sigma == T::zero() {
        return Complex::new(lambda, T::zero());
    }
    csqrt(Complex::new(lambda * lambda, sigma * mu * omega))
}

/// `N = u / (i mu omega)`.
pub fn characteristic_admittance<T: Real>(u: Complex<T>, mu: T, omega: T) -> Complex<T> {
    let k = mu * omega;
    Complex::new(u.im / k, -u.re / k)
}

/// One step of the admittance recursion with admittances scaled by `i omega`.
#[inline]
pub(crate) fn admittance_step<T: Real>(n_hat: Complex<T>, t: Complex<T>, below: Complex<T>) -> Complex<T> {
    if below == n_hat {
        // Homogeneous continuation: the recursion's fixed point, kept exact.
        return n_hat;
    }
    n_hat * (below + n_hat * t) / (n_hat + below * t)
}

/// Surface admittance `i omega Y_1` from raw slices.
#[inline]
pub(crate) fn scaled_surface_admittance<T: Real>(
    lambda: T,
    omega: T,
    sigma: &[T],
    mu: &[T],
    thickness: &[T],
) -> Complex<T> {
    let n = sigma.len();
    let last = n - 1;
    let mut y = propagation_constant(lambda, sigma[last], mu[last], omega) / mu[last];
    for i in (0..last).rev() {
        let u = propagation_constant(lambda, sigma[i], mu[i], omega);
        let n_hat = u / mu[i];
        let t = tanh_guarded(u * thickness[i]);
        y = admittance_step(n_hat, t, y);
    }
    y
}

#[inline]
pub(crate) fn scaled_reflection<T: Real>(n0_hat: Complex<T>, y1_hat: Complex<T>) -> Result<Complex<T>> {
    let den = n0_hat + y1_hat;
    if den.re == T::zero() && den.im == T::zero() {
        return Err(FdemError::DivisionDegenerate);
    }
    let r = (n0_hat - y1_hat) / den;
    if r.re.finite() && r.im.finite() {
        Ok(r)
    } else {
        Err(FdemError::NonFinite("reflection factor"))
    }
}

/// Surface admittance `Y_1(lambda)` at the top of the first layer.
pub fn surface_admittance<T: Real>(lambda: T, model: &LayeredModel<T>, omega: T) -> Result<Complex<T>> {
    let y_hat = scaled_surface_admittance(lambda, omega, &model.sigma, &model.mu, &model.thickness);
    // Y = (i omega Y) / (i omega)
    let y = Complex::new(y_hat.im / omega, -y_hat.re / omega);
    if y.re.finite() && y.im.finite() {
        Ok(y)
    } else {
        Err(FdemError::NonFinite("surface admittance"))
    }
}

/// Reflection factor `R = (N_0 - Y_1) / (N_0 + Y_1)` with `N_0 = lambda / (i mu_0 omega)`.
pub fn reflection_factor<T: Real>(lambda: T, model: &LayeredModel<T>, omega: T) -> Result<Complex<T>> {
    let y_hat = scaled_surface_admittance(lambda, omega, &model.sigma, &model.mu, &model.thickness);
    let n0_hat = Complex::new(lambda, T::zero()) / mu0::<T>();
    scaled_reflection(n0_hat, y_hat)
}

/// Field ratio `M_nu = -rho^(3-nu) H_nu[lambda^(1-nu) exp(-2 h lambda) R(lambda)](rho)`
/// evaluated with the adaptive Hankel transform.
pub fn forward_reading<T: Real>(
    model: &LayeredModel<T>,
    height: T,
    omega: T,
    rho: T,
    orientation: BesselOrder,
    tol: T,
) -> Result<Complex<T>> {
    let two_h: T = height + height;
    let integrand = |lambda: T| -> Result<Complex<T>> {
        let y_hat = scaled_surface_admittance(lambda, omega, &model.sigma, &model.mu, &model.thickness);
        let r = scaled_reflection(Complex::new(lambda / mu0::<T>(), T::zero()), y_hat)?;
        let kernel = match orientation {
            BesselOrder::J0 => lambda,
            BesselOrder::J1 => T::one(),
        } * (-two_h * lambda).exp();
        Ok(r * kernel)
    };
    let h = hankel_transform(integrand, orientation, rho, tol)?;
    let power = match orientation {
        BesselOrder::J0 => rho * rho * rho,
        BesselOrder::J1 => rho * rho,
    };
    Ok(-h * power)
}

/// All readings of one sounding in device order, via [`forward_reading`].
pub fn forward_column<T: Real>(model: &LayeredModel<T>, device: &DeviceConfig<T>, tol: T) -> Result<Readings<T>> {
    let values = device
        .settings()
        .map(|s| forward_reading(model, s.height, s.omega, s.rho, s.orientation, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

/// Applies the forward map column by column: column `j` of the result
/// depends on column `j` of `sigma` only.
pub fn forward_image<T: Real>(sigma: &DMatrix<T>, operator: &ForwardOperator<T>) -> Result<DMatrix<Complex<T>>> {
    if sigma.nrows() != operator.n_layers() {
        return Err(FdemError::DimensionMismatch { expected: operator.n_layers(), found: sigma.nrows() });
    }
    let cols = (0..sigma.ncols())
        .into_par_iter()
        .map(|j| operator.evaluate(sigma.column(j).as_slice()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn omega(f: f64) -> f64 {
        2.0 * std::f64::consts::PI * f
    }

    #[test]
    fn zero_conductivity_propagation_constant_is_lambda() {
        assert_eq!(propagation_constant(1.0, 0.0, MU0, 123.0), Complex::new(1.0, 0.0));
    }

    #[test]
    fn pure_imaginary_radicand() {
        let w = omega(1e4);
        let u = propagation_constant(0.0, 1.0, MU0, w);
        let k = (MU0 * w / 2.0).sqrt();
        assert!((u.re - k).abs() < 1e-15 && (u.im - k).abs() < 1e-15);
    }

    // mpmath, 40 digits: sqrt(0.25 + 1j*0.8*mu0*2*pi*9825)
    #[test]
    fn propagation_constant_matches_extended_precision() {
        let u = propagation_constant(0.5, 0.8, MU0, omega(9825.0));
        assert!((u.re - 0.50377959321318163).abs() < 1e-15, "{u}");
        assert!((u.im - 0.06159446840454717).abs() < 1e-15, "{u}");
    }

    proptest! {
        #[test]
        fn propagation_constant_branch(l in 0.0f64..1e3, s in 0.0f64..10.0, f in 1.0f64..1e6) {
            let u = propagation_constant(l, s, MU0, omega(f));
            prop_assert!(u.re >= 0.0);
            let sq = u * u;
            let scale = l * l + s * MU0 * omega(f) + 1e-300;
            prop_assert!((sq.re - l * l).abs() <= 1e-13 * scale);
            prop_assert!((sq.im - s * MU0 * omega(f)).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn homogeneous_half_space_admittance_is_characteristic() {
        let w = omega(1e4);
        let model = LayeredModel::new(vec![0.3; 5], vec![MU0; 5], vec![0.4, 1.0, 0.2, 2.0]).unwrap();
        let y = surface_admittance(0.7, &model, w).unwrap();
        let n1 = characteristic_admittance(propagation_constant(0.7, 0.3, MU0, w), MU0, w);
        assert!((y - n1).norm() < 1e-12 * n1.norm());
        let single = LayeredModel::new(vec![0.3], vec![MU0], vec![]).unwrap();
        assert_eq!(surface_admittance(0.7, &single, w).unwrap(), n1);
    }

    // mpmath transcription of the unguarded recursion, 40 digits.
    #[test]
    fn three_layer_admittance_matches_extended_precision() {
        let model = LayeredModel::new(vec![0.1, 0.5, 1.0], vec![MU0; 3], vec![1.0, 2.0]).unwrap();
        let y = surface_admittance(0.7, &model, omega(1e4)).unwrap();
        let want = Complex::new(0.14689004237263791, -8.8704347129461163);
        assert!((y - want).norm() < 1e-12 * want.norm(), "{y}");
    }

    #[test]
    fn two_layer_reflection_matches_extended_precision() {
        let model = LayeredModel::new(vec![0.2, 1.0], vec![MU0; 2], vec![1.5]).unwrap();
        let r = reflection_factor(1.0, &model, omega(1e4)).unwrap();
        let want = Complex::new(-8.686236847348843e-5, -0.0047306280340284977);
        assert!((r - want).norm() < 1e-12 * want.norm(), "{r}");
    }

    #[test]
    fn free_space_reflects_nothing() {
        let model = LayeredModel::new(vec![0.0; 4], vec![MU0; 4], vec![0.5; 3]).unwrap();
        for l in [1e-3, 0.5, 1.0, 17.0, 400.0] {
            assert_eq!(reflection_factor(l, &model, omega(775.0)).unwrap(), Complex::new(0.0, 0.0));
        }
        assert_eq!(reflection_factor(0.0, &model, omega(775.0)), Err(FdemError::DivisionDegenerate));
    }

    #[test]
    fn reflection_decays_for_large_lambda() {
        let model = LayeredModel::new(vec![0.5, 1.5, 0.1], vec![MU0; 3], vec![0.3, 0.7]).unwrap();
        let r = reflection_factor(1e3, &model, omega(47025.0)).unwrap();
        assert!(r.norm() < 1e-3);
        for l in [0.01, 0.3, 1.0, 5.0] {
            assert!(reflection_factor(l, &model, omega(47025.0)).unwrap().norm() <= 1.0);
        }
    }

    #[test]
    fn saturated_layers_do_not_overflow() {
        let model = LayeredModel::new(vec![2.0, 2.0, 0.5], vec![MU0; 3], vec![50.0, 80.0]).unwrap();
        let y = surface_admittance(40.0, &model, omega(47025.0)).unwrap();
        let n1 = characteristic_admittance(propagation_constant(40.0, 2.0, MU0, omega(47025.0)), MU0, omega(47025.0));
        assert!((y - n1).norm() < 1e-14 * n1.norm());
    }

    #[test]
    fn free_space_readings_vanish() {
        let model = LayeredModel::new(vec![0.0; 3], vec![MU0; 3], vec![1.0, 1.0]).unwrap();
        let dev = DevicePreset::Gem2.config(&[1.0]).unwrap();
        let col = forward_column(&model, &dev, 1e-8).unwrap();
        assert!(col.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn low_induction_number_matches_linear_approximation() {
        let geometry = LayerGeometry::uniform(10, 5.0).unwrap();
        let model = LayeredModel::with_geometry(vec![0.01; 10], &geometry).unwrap();
        let dev = DevicePreset::Gem2.config(&[1.0]).unwrap();
        let col = forward_column(&model, &dev, 1e-10).unwrap();
        for (s, v) in dev.settings().zip(col.iter()) {
            if s.omega > omega(5000.0) {
                continue;
            }
            // McNeill: quadrature ratio ~ mu0 omega rho^2 sigma_a / 4, damped by the coil height
            let apparent = v.im * 4.0 / (MU0 * s.omega * s.rho * s.rho);
            let height_factor = match s.orientation {
                BesselOrder::J0 => 1.0 / (4.0 * s.height * s.height / (s.rho * s.rho) + 1.0).sqrt(),
                BesselOrder::J1 => {
                    let z = s.height / s.rho;
                    (4.0 * z * z + 1.0).sqrt() - 2.0 * z
                }
            };
            let rel = (apparent / height_factor - 0.01).abs() / 0.01;
            assert!(rel < 0.15, "{s:?}: apparent {apparent}, rel {rel}");
        }
    }

    #[test]
    fn three_layer_reading_matches_extended_precision() {
        let model = LayeredModel::new(vec![0.1, 0.5, 1.0], vec![MU0; 3], vec![1.0, 2.0]).unwrap();
        let v0 = forward_reading(&model, 1.0, omega(1e4), 2.82, BesselOrder::J0, 1e-8).unwrap();
        let v1 = forward_reading(&model, 1.0, omega(1e4), 2.82, BesselOrder::J1, 1e-8).unwrap();
        let want0 = Complex::new(0.016021904504942295, 0.026831913595272297);
        let want1 = Complex::new(0.0084707164583370119, 0.01700712142524053);
        assert!((v0 - want0).norm() < 1e-6 * want0.norm(), "{v0}");
        assert!((v1 - want1).norm() < 1e-6 * want1.norm(), "{v1}");
        let tight = forward_reading(&model, 1.0, omega(1e4), 2.82, BesselOrder::J0, 1e-12).unwrap();
        assert!((tight - want0).norm() < 1e-10 * want0.norm(), "{tight}");
    }

    #[test]
    fn model_validation() {
        assert!(LayeredModel::new(vec![-0.1], vec![MU0], vec![]).is_err());
        assert!(LayeredModel::new(vec![0.1, 0.1], vec![MU0, MU0], vec![]).is_err());
        assert!(LayeredModel::new(vec![0.1, 0.1], vec![MU0, 0.0], vec![1.0]).is_err());
        assert!(LayeredModel::<f64>::new(vec![], vec![], vec![]).is_err());
        let g = LayerGeometry::<f64>::uniform(20, 5.0).unwrap();
        assert_eq!(g.thickness.len(), 19);
        assert!((g.layer_tops()[19] - 4.75).abs() < 1e-12);
    }
}
