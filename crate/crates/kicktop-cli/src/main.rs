//! `kicktop`: command-line driver for the kicked-top experiments.
//!
//! Usage: `kicktop <experiment> [--config FILE] [--set key=value ...]
//! --out DIR [--seed N] [--threads M]`, or `kicktop list` for the
//! experiment table. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure.

mod config;
mod experiments;

use clap::Parser;
use config::{Experiment, ExperimentConfig};
use experiments::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kicktop",
    version,
    about = "Kicked-top experiments: classical portraits, correlation sweeps, COE baselines"
)]
struct Cli {
    /// Experiment name (see `kicktop list`) or `list`.
    experiment: String,

    /// Configuration file (key = value with sections).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set k_grid=0.5:0.1:6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory for CSV artifacts and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,

    /// RNG seed (overrides the `seed` key).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for grid parallelism (0 = automatic).
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_config(cli: &Cli, experiment: Experiment) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        cfg.apply_file(&text).map_err(CliError::Config)?;
        if cfg.experiment != experiment {
            return Err(CliError::Config(format!(
                "config file names experiment `{}` but `{}` was requested",
                cfg.experiment.name(),
                experiment.name()
            )));
        }
    }
    cfg.apply_env().map_err(CliError::Config)?;
    for pair in &cli.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--set `{pair}`: expected KEY=VALUE"))
        })?;
        cfg.set(key.trim(), value.trim()).map_err(CliError::Config)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.experiment == "list" {
        print!("{}", experiments::list_experiments());
        return Ok(());
    }
    let experiment = Experiment::from_name(&cli.experiment).ok_or_else(|| {
        CliError::Config(format!(
            "unknown experiment `{}`; try `kicktop list`",
            cli.experiment
        ))
    })?;
    let cfg = resolve_config(cli, experiment)?;
    cfg.validate().map_err(CliError::Config)?;
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Config("--out DIR is required".to_string()))?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let summary = experiments::run(&cfg, &out)?;
    println!("{} -> {}", cfg.experiment.name(), out.display());
    for line in summary {
        println!("  {line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kicktop: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(3),
            }
        }
    }
}
