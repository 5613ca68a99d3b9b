use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fdem_cli::commands;
use fdem_cli::RunConfig;
use fdem_core::forward::DevicePreset;
use fdem_core::harness::Method;

#[derive(Parser)]
#[command(name = "fdem", version, about = "FDEM conductivity imaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults reproduce the synthetic benchmark.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Noise seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Device preset (gem2, cmd-explorer), overriding the config.
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<DevicePreset>,
}

#[derive(Subcommand)]
enum Command {
    /// Predict data for the configured conductivity image.
    Forward,
    /// Write the phantom and its exact and noisy data.
    Synth,
    /// Invert data (or synthesized data) with one method.
    Invert {
        #[arg(long, default_value = "alternating", value_parser = parse_method)]
        method: Method,
    },
    /// Run all configured methods on the same noisy data and tabulate errors.
    Compare,
}

fn parse_preset(s: &str) -> Result<DevicePreset, String> {
    DevicePreset::parse(s).ok_or_else(|| format!("unknown preset '{s}' (gem2, cmd-explorer)"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: fdem_core::FdemError| e.to_string())
}

fn configure(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.noise.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(preset) = cli.preset {
        config.preset = preset;
        config.device = None;
    }
    config.validate()?;
    Ok(config)
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("FDEM_THREADS") {
        let n: usize = v.parse().with_context(|| format!("FDEM_THREADS='{v}' is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    let config = configure(&cli)?;
    let name = match &cli.command {
        Command::Forward => {
            commands::forward(&config)?;
            "forward"
        }
        Command::Synth => {
            commands::synth(&config)?;
            "synth"
        }
        Command::Invert { method } => {
            let (_, summary) = commands::invert(&config, *method)?;
            match summary.rre {
                Some(e) => println!("{}: rre {e:.5}, misfit {:.3e}", method.name(), summary.misfit),
                None => println!("{}: misfit {:.3e}", method.name(), summary.misfit),
            }
            "invert"
        }
        Command::Compare => {
            let results = commands::compare(&config)?;
            print!("{}", commands::rre_table(&config.name, &results));
            "compare"
        }
    };
    for path in commands::describe(&config.out, name) {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
