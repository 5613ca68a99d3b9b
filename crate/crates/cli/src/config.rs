//! JSON run configuration.
//!
//! Every key is optional; missing keys take the values of
//! [`RunConfig::default`], which reproduce the synthetic interface benchmark.
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fdem_core::forward::{DeviceConfig, DevicePreset, ForwardOperator, LayerGeometry, DEFAULT_TOLERANCE};
use fdem_core::harness::{ExperimentConfig, Method, NoiseSpec};
use fdem_core::solvers::SolverParams;
use serde::{Deserialize, Serialize};

/// An instrument given explicitly instead of by preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub rho: Vec<f64>,
    pub heights: Vec<f64>,
    pub frequencies_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Label of the `example` column in comparison tables.
    pub name: String,
    pub preset: DevicePreset,
    /// Replaces `preset` and `heights` when present.
    pub device: Option<DeviceSpec>,
    pub heights: Vec<f64>,
    pub n_layers: usize,
    /// Total thickness (m) of the finite layers when `thickness` is absent.
    pub depth: f64,
    /// Thicknesses of the `n_layers - 1` finite layers.
    pub thickness: Option<Vec<f64>>,
    pub n_soundings: usize,
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub noise: NoiseSpec,
    pub quadrature_tol: f64,
    pub solver: SolverParams<f64>,
    /// Methods run by `compare`, in table order.
    pub methods: Vec<Method>,
    /// Conductivity image read by `forward`.
    pub conductivity: Option<PathBuf>,
    /// Data inverted by `invert`; synthesized from the phantom when absent.
    pub data: Option<PathBuf>,
    /// Reference image for the error reported by `invert`.
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        RunConfig {
            name: e.name,
            preset: e.preset,
            device: None,
            heights: e.heights,
            n_layers: e.n_layers,
            depth: e.depth,
            thickness: None,
            n_soundings: e.n_soundings,
            sigma_low: e.sigma_low,
            sigma_high: e.sigma_high,
            noise: e.noise,
            quadrature_tol: DEFAULT_TOLERANCE,
            solver: e.solver,
            methods: Method::ALL.to_vec(),
            conductivity: None,
            data: None,
            truth: None,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Reads a config file and resolves its paths relative to it.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.conductivity, &mut config.data, &mut config.truth].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if config.out.is_relative() {
            config.out = base.join(&config.out);
        }
        Ok(config)
    }

    /// Checks parameter ranges and that referenced input files exist.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.solver.validate()?;
        if self.n_layers == 0 || self.n_soundings == 0 {
            bail!("n_layers and n_soundings must be positive");
        }
        if let Some(t) = &self.thickness {
            if t.len() + 1 != self.n_layers {
                bail!("thickness lists {} layers, expected {}", t.len(), self.n_layers - 1);
            }
        }
        if !(self.sigma_low >= 0.0 && self.sigma_high >= 0.0) {
            bail!("phantom conductivities must be nonnegative");
        }
        if self.methods.is_empty() {
            bail!("methods is empty");
        }
        for p in [&self.conductivity, &self.data, &self.truth].into_iter().flatten() {
            if !p.is_file() {
                bail!("input file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    pub fn device(&self) -> anyhow::Result<DeviceConfig<f64>> {
        Ok(match &self.device {
            Some(d) => DeviceConfig::from_frequencies(d.rho.clone(), d.heights.clone(), &d.frequencies_hz)?,
            None => self.preset.config(&self.heights)?,
        })
    }

    pub fn geometry(&self) -> anyhow::Result<LayerGeometry<f64>> {
        Ok(match &self.thickness {
            Some(t) => {
                if t.len() + 1 != self.n_layers || t.iter().any(|d| !(*d > 0.0)) {
                    bail!("thickness needs {} positive entries", self.n_layers.saturating_sub(1));
                }
                LayerGeometry { mu: vec![fdem_core::forward::MU0; self.n_layers], thickness: t.clone() }
            }
            None => LayerGeometry::uniform(self.n_layers, self.depth)?,
        })
    }

    pub fn operator(&self) -> anyhow::Result<ForwardOperator<f64>> {
        Ok(ForwardOperator::new(self.device()?, self.geometry()?, self.quadrature_tol)?)
    }

    /// The phantom, noise and solver part, as understood by the harness.
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            name: self.name.clone(),
            preset: self.preset,
            heights: self.heights.clone(),
            n_layers: self.n_layers,
            depth: self.depth,
            n_soundings: self.n_soundings,
            sigma_low: self.sigma_low,
            sigma_high: self.sigma_high,
            noise: self.noise,
            quadrature_tol: self.quadrature_tol,
            solver: self.solver.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.solver.q, 0.1);
        assert_eq!(c.solver.gamma, 1e-4);
        assert_eq!(c.solver.ell, 15);
        assert_eq!(c.solver.sigma0, 0.1);
        assert_eq!(c.solver.outer_maxit, 50);
        assert_eq!(c.solver.p, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n_layer": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"solver": {"gama": 1}}"#).is_err());
    }

    #[test]
    fn explicit_device_and_thickness() {
        let c: RunConfig = serde_json::from_str(
            r#"{"device": {"rho": [1.0], "heights": [0.5], "frequencies_hz": [1000]}, "n_layers": 3, "thickness": [0.5, 1.5]}"#,
        )
        .unwrap();
        let op = c.operator().unwrap();
        assert_eq!(op.n_readings(), 2);
        assert_eq!(op.geometry().layer_tops(), vec![0.0, 0.5, 2.0]);
        let bad = RunConfig { thickness: Some(vec![1.0]), ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn missing_input_fails_validation() {
        let c = RunConfig { data: Some("/nonexistent/b.csv".into()), ..Default::default() };
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
