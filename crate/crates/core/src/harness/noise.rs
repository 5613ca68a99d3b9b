use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::{lit, to_f64, Real};

/// How the noise amplitude scales with the data norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScaling {
    /// `e = delta / sqrt(m) ||B||_F w`: `delta` is a relative noise level.
    #[default]
    Norm,
    /// `e = delta / sqrt(m) ||B||_F^2 w`, kept for reproducing that convention.
    SquaredNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
    pub scaling: NoiseScaling,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { delta: 1e-2, seed: 0, scaling: NoiseScaling::Norm }
    }
}

/// `B + e` with complex Gaussian `w` of unit variance per entry (real and
/// imaginary parts independent, variance 1/2 each), drawn column-major from a
/// ChaCha8 stream seeded with `spec.seed`.
pub fn add_noise<T: Real>(b: &DMatrix<Complex<T>>, spec: &NoiseSpec) -> DMatrix<Complex<T>> {
    if spec.delta == 0.0 {
        return b.clone();
    }
    let m = b.nrows().max(1);
    let norm = b.iter().map(|z| to_f64(z.norm_sqr())).sum::<f64>().sqrt();
    let scale = match spec.scaling {
        NoiseScaling::Norm => norm,
        NoiseScaling::SquaredNorm => norm * norm,
    };
    let amp = spec.delta / (m as f64).sqrt() * scale * std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = b.clone();
    for z in out.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z += Complex::new(lit::<T>(amp * re), lit::<T>(amp * im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(12, 9, |i, j| Complex::new(1e-3 * (i + 1) as f64, 2e-3 * (j as f64 - 3.0)))
    }

    #[test]
    fn zero_level_is_identity() {
        let b = data();
        assert_eq!(add_noise(&b, &NoiseSpec { delta: 0.0, ..Default::default() }), b);
    }

    #[test]
    fn deterministic_per_seed() {
        let b = data();
        let s = NoiseSpec { seed: 42, ..Default::default() };
        assert_eq!(add_noise(&b, &s), add_noise(&b, &s));
        assert_ne!(add_noise(&b, &s), add_noise(&b, &NoiseSpec { seed: 43, ..s }));
    }

    #[test]
    fn expected_norm_scaling() {
        let b = data();
        let norm = b.norm();
        let delta = 0.05;
        let draws = 1000;
        let mean_sq: f64 = (0..draws)
            .map(|seed| (add_noise(&b, &NoiseSpec { delta, seed, ..Default::default() }) - &b).norm_squared())
            .sum::<f64>()
            / draws as f64;
        let want = delta * norm * (b.ncols() as f64).sqrt();
        assert!((mean_sq.sqrt() / want - 1.0).abs() < 0.02, "{} vs {want}", mean_sq.sqrt());
    }

    #[test]
    fn squared_convention_scales_by_the_norm() {
        let b = data();
        let a = add_noise(&b, &NoiseSpec { seed: 1, ..Default::default() }) - &b;
        let s = add_noise(&b, &NoiseSpec { seed: 1, scaling: NoiseScaling::SquaredNorm, ..Default::default() }) - &b;
        assert!((s.norm() / a.norm() - b.norm()).abs() < 1e-12);
    }
}
