use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{add_noise, phantom_interface, relative_misfit, rre, splicing, NoiseSpec, Phantom};
use crate::error::{FdemError, Result};
use crate::forward::{forward_image, DevicePreset, ForwardOperator, LayerGeometry, DEFAULT_TOLERANCE};
use crate::solvers::{alternating_invert, decoupled_invert, Inversion, IterationTrace, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Alternating,
    Decoupled,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Decoupled, Method::Alternating];

    pub fn name(self) -> &'static str {
        match self {
            Method::Alternating => "alternating",
            Method::Decoupled => "decoupled",
        }
    }

    pub fn invert(self, data: &DMatrix<Complex64>, operator: &ForwardOperator<f64>, params: &SolverParams<f64>) -> Result<Inversion<f64>> {
        match self {
            Method::Alternating => alternating_invert(data, operator, params),
            Method::Decoupled => decoupled_invert(data, operator, params),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = FdemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(Method::Alternating),
            "decoupled" => Ok(Method::Decoupled),
            _ => Err(FdemError::InvalidParams(format!("unknown method '{s}'"))),
        }
    }
}

/// A synthetic interface-phantom experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label used in result tables.
    pub name: String,
    pub preset: DevicePreset,
    /// Instrument heights above ground (m).
    pub heights: Vec<f64>,
    pub n_layers: usize,
    /// Depth (m) split uniformly into `n_layers` layers, the last unbounded.
    pub depth: f64,
    pub n_soundings: usize,
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub noise: NoiseSpec,
    pub quadrature_tol: f64,
    pub solver: SolverParams<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "interface".into(),
            preset: DevicePreset::Gem2,
            heights: vec![1.0],
            n_layers: 20,
            depth: 5.0,
            n_soundings: 50,
            sigma_low: 0.0,
            sigma_high: 1.0,
            noise: NoiseSpec::default(),
            quadrature_tol: DEFAULT_TOLERANCE,
            solver: SolverParams::desk(),
        }
    }
}

impl ExperimentConfig {
    pub fn operator(&self) -> Result<ForwardOperator<f64>> {
        ForwardOperator::new(
            self.preset.config(&self.heights)?,
            LayerGeometry::uniform(self.n_layers, self.depth)?,
            self.quadrature_tol,
        )
    }
}

/// Phantom, operator and the exact and noisy data it produces.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub phantom: Phantom<f64>,
    pub operator: ForwardOperator<f64>,
    pub clean: DMatrix<Complex64>,
    pub noisy: DMatrix<Complex64>,
}

pub fn synthesize(config: &ExperimentConfig) -> Result<Synthetic> {
    synthesize_with(config.operator()?, config)
}

/// Like [`synthesize`] but on a caller-built operator; the device and
/// geometry fields of `config` are ignored.
pub fn synthesize_with(operator: ForwardOperator<f64>, config: &ExperimentConfig) -> Result<Synthetic> {
    let phantom = phantom_interface(operator.n_layers(), config.n_soundings, config.sigma_low, config.sigma_high)?;
    let clean = forward_image(&phantom.sigma, &operator)?;
    let noisy = add_noise(&clean, &config.noise);
    Ok(Synthetic { phantom, operator, clean, noisy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub rre: f64,
    pub splicing: f64,
    /// `||M(Sigma) - B_delta||_F / ||B_delta||_F`.
    pub misfit: f64,
    pub seconds: f64,
    pub trace: IterationTrace,
    #[serde(skip)]
    pub sigma: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub results: Vec<MethodResult>,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// Generates the data once and runs both inversions on the same noisy matrix.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_on(&synthesize(config)?, config)
}

/// Runs both methods on already generated data.
pub fn run_on(syn: &Synthetic, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let results = Method::ALL
        .iter()
        .map(|&method| evaluate(method, syn, &config.solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport { config: config.clone(), results })
}

pub fn evaluate(method: Method, syn: &Synthetic, params: &SolverParams<f64>) -> Result<MethodResult> {
    let start = Instant::now();
    let inv = method.invert(&syn.noisy, &syn.operator, params)?;
    let seconds = start.elapsed().as_secs_f64();
    let predicted = forward_image(&inv.sigma, &syn.operator)?;
    Ok(MethodResult {
        method,
        rre: rre(&inv.sigma, &syn.phantom.sigma)?,
        splicing: splicing(&inv.sigma),
        misfit: relative_misfit(&predicted, &syn.noisy),
        seconds,
        trace: inv.trace,
        sigma: inv.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_layers: 8,
            n_soundings: 4,
            noise: NoiseSpec { delta: 0.0, ..Default::default() },
            solver: SolverParams { ell: 5, outer_maxit: 2, gn_maxit: 2, decoupled_maxit: 3, mm_maxit: 5, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn truth_as_start_gives_zero_error() {
        let config = ExperimentConfig {
            sigma_low: 0.1,
            sigma_high: 0.1,
            solver: SolverParams { sigma0: 0.1, ..small().solver },
            ..small()
        };
        let report = run_experiment(&config).unwrap();
        for r in &report.results {
            assert!(r.rre < 1e-8, "{:?}: {}", r.method, r.rre);
        }
    }

    #[test]
    fn noiseless_data_equal_clean_data() {
        let syn = synthesize(&small()).unwrap();
        assert_eq!(syn.clean, syn.noisy);
        assert_eq!(syn.clean.shape(), (12, 4));
    }

    #[test]
    fn reports_are_reproducible() {
        let config = ExperimentConfig { noise: NoiseSpec { delta: 1e-2, seed: 3, ..Default::default() }, ..small() };
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        for (x, y) in a.results.iter().zip(&b.results) {
            assert_eq!(x.rre.to_bits(), y.rre.to_bits());
            assert_eq!(x.sigma, y.sigma);
            assert_eq!(x.trace, y.trace);
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = small();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), config);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"preset": "cmd-explorer", "solver": {"q": 0.5}}"#).unwrap();
        assert_eq!(partial.preset, DevicePreset::CmdExplorer);
        assert_eq!(partial.solver.q, 0.5);
        assert_eq!(partial.solver.ell, 15);
    }
}
