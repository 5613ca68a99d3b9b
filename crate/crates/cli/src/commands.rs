use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fdem_core::forward::forward_image;
use fdem_core::harness::{evaluate, relative_misfit, rre, splicing, synthesize_with, Method, MethodResult, Synthetic};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::format::{data_to_string, read_data, read_sigma, sigma_to_pgm, sigma_to_string, Meta};

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(config: &RunConfig) -> anyhow::Result<&Path> {
    std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    Ok(&config.out)
}

fn device_meta(config: &RunConfig) -> Meta {
    let mut meta = Meta::new();
    let device = if config.device.is_some() { "custom".to_string() } else { config.preset.to_string() };
    meta.insert("device".into(), device);
    meta.insert("n_layers".into(), config.n_layers.to_string());
    meta
}

fn noise_meta(config: &RunConfig) -> Meta {
    let mut meta = device_meta(config);
    meta.insert("delta".into(), format!("{:e}", config.noise.delta));
    meta.insert("seed".into(), config.noise.seed.to_string());
    meta
}

/// Predicted data of the image named by `config.conductivity`, written to `B.csv`.
pub fn forward(config: &RunConfig) -> anyhow::Result<DMatrix<Complex64>> {
    let Some(path) = &config.conductivity else {
        bail!("forward needs a 'conductivity' input file in the config");
    };
    let (sigma, _) = read_sigma(path)?;
    let operator = config.operator()?;
    if sigma.nrows() != operator.n_layers() {
        bail!("{} has {} layers, the geometry has {}", path.display(), sigma.nrows(), operator.n_layers());
    }
    let data = forward_image(&sigma, &operator)?;
    let out = out_dir(config)?;
    write(&out.join("B.csv"), data_to_string(&data, &device_meta(config)))?;
    Ok(data)
}

/// Phantom, exact and noisy data plus the effective config.
pub fn synth(config: &RunConfig) -> anyhow::Result<Synthetic> {
    let syn = synthesize_with(config.operator()?, &config.experiment())?;
    let out = out_dir(config)?;
    write(&out.join("sigma_exact.csv"), sigma_to_string(&syn.phantom.sigma, &Meta::new()))?;
    write(&out.join("B.csv"), data_to_string(&syn.clean, &device_meta(config)))?;
    write(&out.join("B_delta.csv"), data_to_string(&syn.noisy, &noise_meta(config)))?;
    write(&out.join("config.json"), serde_json::to_string_pretty(config)?)?;
    Ok(syn)
}

/// Scalar outcome of `invert`, saved as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub method: Method,
    /// Present when a reference image was available.
    pub rre: Option<f64>,
    pub splicing: f64,
    pub misfit: f64,
    pub outer_iterations: usize,
    pub failed_columns: usize,
}

/// Inverts `config.data`, or freshly synthesized data when none is given.
pub fn invert(config: &RunConfig, method: Method) -> anyhow::Result<(DMatrix<f64>, Summary)> {
    let operator = config.operator()?;
    let (data, truth) = match &config.data {
        Some(path) => {
            let (data, _) = read_data(path)?;
            let truth = config.truth.as_deref().map(read_sigma).transpose()?.map(|(s, _)| s);
            (data, truth)
        }
        None => {
            let syn = synthesize_with(operator.clone(), &config.experiment())?;
            (syn.noisy, Some(syn.phantom.sigma))
        }
    };
    if data.nrows() != operator.n_readings() {
        bail!("data have {} readings per sounding, the device records {}", data.nrows(), operator.n_readings());
    }
    let inv = method.invert(&data, &operator, &config.solver)?;
    let predicted = forward_image(&inv.sigma, &operator)?;
    let summary = Summary {
        method,
        rre: truth.map(|t| rre(&inv.sigma, &t)).transpose()?,
        splicing: splicing(&inv.sigma),
        misfit: relative_misfit(&predicted, &data),
        outer_iterations: inv.trace.outer.len(),
        failed_columns: inv.trace.failures.len(),
    };
    let out = out_dir(config)?;
    let mut meta = Meta::new();
    meta.insert("method".into(), method.name().into());
    write(&out.join("sigma.csv"), sigma_to_string(&inv.sigma, &meta))?;
    write(&out.join("sigma.pgm"), sigma_to_pgm(&inv.sigma))?;
    write(&out.join("trace.json"), serde_json::to_string_pretty(&inv.trace)?)?;
    write(&out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok((inv.sigma, summary))
}

/// `example,method,rre,splicing` rows in the order of `results`.
pub fn rre_table(example: &str, results: &[MethodResult]) -> String {
    let mut out = String::from("example,method,rre,splicing\n");
    for r in results {
        let _ = writeln!(out, "{example},{},{:.5},{:.5}", r.method.name(), r.rre, r.splicing);
    }
    out
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    results: &'a [MethodResult],
}

/// Runs every configured method on one noisy data set and tabulates the errors.
pub fn compare(config: &RunConfig) -> anyhow::Result<Vec<MethodResult>> {
    let syn = synthesize_with(config.operator()?, &config.experiment())?;
    let results = config
        .methods
        .iter()
        .map(|&m| evaluate(m, &syn, &config.solver))
        .collect::<fdem_core::Result<Vec<_>>>()?;
    let out = out_dir(config)?;
    write(&out.join("rre_table.csv"), rre_table(&config.name, &results))?;
    for r in &results {
        write(&out.join(format!("sigma_{}.csv", r.method.name())), sigma_to_string(&r.sigma, &Meta::new()))?;
    }
    write(&out.join("report.json"), serde_json::to_string_pretty(&Report { config, results: &results })?)?;
    Ok(results)
}

/// Files a command leaves in the output directory.
pub fn outputs(command: &str) -> &'static [&'static str] {
    match command {
        "forward" => &["B.csv"],
        "synth" => &["sigma_exact.csv", "B.csv", "B_delta.csv", "config.json"],
        "invert" => &["sigma.csv", "sigma.pgm", "trace.json", "summary.json"],
        "compare" => &["rre_table.csv", "report.json"],
        _ => &[],
    }
}

pub fn describe(out: &Path, command: &str) -> Vec<PathBuf> {
    outputs(command).iter().map(|f| out.join(f)).collect()
}
