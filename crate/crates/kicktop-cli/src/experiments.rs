//! Experiment drivers: run the configured computation, write its CSV
//! artifacts and the manifest.

use crate::config::{
    EnsembleKind, Experiment, ExperimentConfig, LayoutKind, NormalizationKind, SectorModeKind,
};
use kicktop::classical::{self, ClassicalPoint, SeedLayout};
use kicktop::correlations::QNormalization;
use kicktop::dynamics::{self, SweepRecord};
use kicktop::numfmt::sig12;
use kicktop::rmt::{self, EigvecSource, Ensemble, EnsembleRow, EnsembleSpec, SectorMode};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// CLI failure classes, mapped to exit codes 2 and 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<kicktop::Error> for CliError {
    fn from(e: kicktop::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Numerical(format!("io: {e}"))
}

fn ensemble_of(kind: EnsembleKind) -> Ensemble {
    match kind {
        EnsembleKind::BlockCoe => Ensemble::BlockCoe,
        EnsembleKind::FullCoe => Ensemble::FullCoe,
        EnsembleKind::HaarSphereReal => Ensemble::HaarSphereReal,
    }
}

fn normalization_of(kind: NormalizationKind) -> QNormalization {
    match kind {
        NormalizationKind::Qubit2j => QNormalization::Qubit2j,
        NormalizationKind::Collective2jPlus1 => QNormalization::Collective2jPlus1,
    }
}

/// Run the configured experiment into `out_dir`; returns the manifest
/// summary lines.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    fs::create_dir_all(out_dir).map_err(io_err)?;
    let summary = match cfg.experiment {
        Experiment::Portrait => run_portrait(cfg, out_dir)?,
        Experiment::SweepK => run_sweep_k(cfg, out_dir)?,
        Experiment::ScalingJ => run_scaling_j(cfg, out_dir)?,
        Experiment::Table1 => run_table1(cfg, out_dir)?,
        Experiment::CoeCompare => run_coe_compare(cfg, out_dir)?,
        Experiment::EigvecQ => run_eigvec_q(cfg, out_dir)?,
        Experiment::StabilityScan => run_stability_scan(cfg, out_dir)?,
    };
    write_manifest(cfg, out_dir, &summary)?;
    Ok(summary)
}

fn write_manifest(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    summary: &[String],
) -> Result<(), CliError> {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut text = String::new();
    let _ = writeln!(text, "experiment = {}", cfg.experiment.name());
    let _ = writeln!(text, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "timestamp_unix = {timestamp}");
    for line in summary {
        let _ = writeln!(text, "{line}");
    }
    let _ = writeln!(text, "# resolved configuration");
    text.push_str(&cfg.to_file_string());
    fs::write(out_dir.join("manifest.txt"), text).map_err(io_err)
}

fn write_long_format(
    sweep: &SweepRecord<f64>,
    path: &Path,
) -> Result<(), CliError> {
    let mut text = String::from("axis_value,measure,value\n");
    for (i, row) in sweep.rows.iter().enumerate() {
        let axis = sig12(sweep.axis_values[i]);
        for (name, value) in [
            ("D", row.d_mean),
            ("DG", row.dg_mean),
            ("Q", row.q_mean),
        ] {
            let _ = writeln!(text, "{axis},{name},{}", sig12(value));
        }
    }
    fs::write(path, text).map_err(io_err)
}

fn run_portrait(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let layout = match cfg.layout {
        LayoutKind::Grid => SeedLayout::Grid,
        LayoutKind::Random => SeedLayout::Random,
    };
    let orbits = classical::phase_portrait(
        cfg.k,
        cfg.p,
        cfg.n_seeds,
        cfg.n_orbit_steps,
        layout,
        cfg.seed,
    )?;
    let mut buf = Vec::new();
    classical::write_portrait_csv(&orbits, &mut buf).map_err(io_err)?;
    fs::write(out.join("portrait.csv"), buf).map_err(io_err)?;
    Ok(vec![format!("orbits = {}", orbits.len())])
}

fn run_sweep_k(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let j = cfg.spin().map_err(CliError::Config)?;
    let sweep = dynamics::sweep_k(
        j,
        cfg.p,
        cfg.theta0,
        cfg.phi0,
        &cfg.k_grid.values(),
        cfg.steps as usize,
        normalization_of(cfg.normalization),
    )?;
    let mut buf = Vec::new();
    dynamics::write_sweep_csv(&sweep, &mut buf).map_err(io_err)?;
    fs::write(out.join("sweep_k.csv"), buf).map_err(io_err)?;
    if cfg.long_format {
        write_long_format(&sweep, &out.join("sweep_k_long.csv"))?;
    }
    let mut summary = Vec::new();
    match dynamics::detect_jump(&sweep) {
        Some(k) => summary.push(format!("discord_jump_at_k = {}", sig12(k))),
        None => summary.push("discord_jump_at_k = none".to_string()),
    }
    Ok(summary)
}

fn run_scaling_j(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let spins = cfg.scaling_spins().map_err(CliError::Config)?;
    let sweep = dynamics::sweep_j(
        cfg.k,
        cfg.p,
        cfg.theta0,
        cfg.phi0,
        &spins,
        cfg.steps as usize,
        normalization_of(cfg.normalization),
    )?;
    let mut buf = Vec::new();
    dynamics::write_sweep_csv(&sweep, &mut buf).map_err(io_err)?;
    fs::write(out.join("scaling_j.csv"), buf).map_err(io_err)?;
    if cfg.long_format {
        write_long_format(&sweep, &out.join("scaling_j_long.csv"))?;
    }
    let mut summary = Vec::new();
    match dynamics::power_law_fit(&sweep, cfg.j_min_fit) {
        Ok(fits) => {
            for (name, fit) in ["D", "DG", "Q"].iter().zip(fits.iter()) {
                summary.push(format!(
                    "exponent_{name} = {} +- {} (n = {})",
                    sig12(fit.exponent),
                    sig12(fit.std_error),
                    fit.n_points
                ));
            }
        }
        Err(e) => summary.push(format!("power_law_fit = failed ({e})")),
    }
    Ok(summary)
}

fn table_row(
    j: kicktop::SpinQuantumNumber,
    driver: &str,
    avg: &dynamics::AveragedCorrelations<f64>,
    cfg: &ExperimentConfig,
) -> String {
    format!(
        "{},{driver},{},{},{},{},{},{},{},{},{},{}\n",
        sig12(j.j::<f64>()),
        sig12(avg.d_mean),
        sig12(avg.d_std),
        sig12(avg.dg_mean),
        sig12(avg.dg_std),
        sig12(avg.q_mean),
        sig12(avg.q_std),
        cfg.steps,
        sig12(cfg.k),
        sig12(cfg.p),
        cfg.seed,
    )
}

fn run_table1(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let spins = cfg.spin_list().map_err(CliError::Config)?;
    let mut csv =
        String::from("j,driver,D_mean,D_std,DG_mean,DG_std,Q_mean,Q_std,T,k,p,seed\n");
    let mut summary = Vec::new();
    for &j in &spins {
        let floquet = dynamics::time_averaged_correlations(
            j,
            cfg.k,
            cfg.p,
            cfg.theta0,
            cfg.phi0,
            cfg.steps as usize,
        )?;
        csv.push_str(&table_row(j, "floquet", &floquet, cfg));
        let spec = EnsembleSpec {
            j,
            n_samples: cfg.n_samples,
            rng_seed: cfg.seed,
            ensemble: ensemble_of(cfg.ensemble),
        };
        let coe = rmt::coe_time_average(&spec, cfg.theta0, cfg.phi0, cfg.steps as usize)?;
        csv.push_str(&table_row(j, "coe", &coe, cfg));
        summary.push(format!(
            "j={j}: floquet D={} DG={} Q={}; coe D={} DG={} Q={}",
            sig12(floquet.d_mean),
            sig12(floquet.dg_mean),
            sig12(floquet.q_mean),
            sig12(coe.d_mean),
            sig12(coe.dg_mean),
            sig12(coe.q_mean),
        ));
    }
    fs::write(out.join("table1.csv"), csv).map_err(io_err)?;
    Ok(summary)
}

fn run_coe_compare(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let spins = cfg.spin_list().map_err(CliError::Config)?;
    let mut rows = Vec::new();
    for &j in &spins {
        let spec = EnsembleSpec {
            j,
            n_samples: cfg.n_samples,
            rng_seed: cfg.seed,
            ensemble: ensemble_of(cfg.ensemble),
        };
        let averages = rmt::coe_time_average(&spec, cfg.theta0, cfg.phi0, cfg.steps as usize)?;
        rows.push(EnsembleRow {
            j,
            ensemble: spec.ensemble,
            n_samples: cfg.n_samples,
            seed: cfg.seed,
            averages,
        });
    }
    let mut buf = Vec::new();
    rmt::write_ensemble_csv(&rows, &mut buf).map_err(io_err)?;
    fs::write(out.join("ensemble.csv"), buf).map_err(io_err)?;
    Ok(vec![format!("rows = {}", rows.len())])
}

fn run_eigvec_q(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let spins = cfg.spin_list().map_err(CliError::Config)?;
    let mode = match cfg.sector_mode {
        SectorModeKind::Mixed => SectorMode::Mixed,
        SectorModeKind::ParityResolved => SectorMode::ParityResolved,
    };
    let k_values = cfg.k_values.values();
    let mut csv = String::from("j,source,sector,n_vectors,Q_mean,Q_stderr,Q_analytic\n");
    for &j in &spins {
        let analytic = rmt::analytic_q_average::<f64>(j);
        let spec = EnsembleSpec {
            j,
            n_samples: cfg.n_samples,
            rng_seed: cfg.seed,
            ensemble: ensemble_of(cfg.ensemble),
        };
        let coe = rmt::eigenvector_q_statistics::<f64>(
            EigvecSource::CoeSamples(&spec),
            mode,
            QNormalization::Collective2jPlus1,
        )?;
        let floquet = rmt::eigenvector_q_statistics::<f64>(
            EigvecSource::FloquetKRange {
                j,
                p: cfg.p,
                k_values: &k_values,
            },
            mode,
            QNormalization::Collective2jPlus1,
        )?;
        for (source, rows) in [("coe", &coe), ("floquet", &floquet)] {
            for (label, stats) in rows {
                let _ = writeln!(
                    csv,
                    "{},{source},{},{},{},{},{}",
                    sig12(j.j::<f64>()),
                    label.name(),
                    stats.n_vectors,
                    sig12(stats.mean),
                    sig12(stats.std_error),
                    sig12(analytic),
                );
            }
        }
    }
    fs::write(out.join("eigvec_q.csv"), csv).map_err(io_err)?;
    Ok(vec![format!("j_values = {}", spins.len())])
}

fn run_stability_scan(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let point = ClassicalPoint::from_angles(cfg.theta0, cfg.phi0);
    let kb = classical::stability_scan(
        &point,
        cfg.period as usize,
        cfg.p,
        cfg.k_range,
        cfg.dk,
    )?;
    let mut csv = String::from("theta0,phi0,period,p,k_lo,k_hi,dk,k_b\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        sig12(cfg.theta0),
        sig12(cfg.phi0),
        cfg.period,
        sig12(cfg.p),
        sig12(cfg.k_range.0),
        sig12(cfg.k_range.1),
        sig12(cfg.dk),
        sig12(kb),
    );
    fs::write(out.join("stability.csv"), csv).map_err(io_err)?;
    Ok(vec![format!("k_bifurcation = {}", sig12(kb))])
}

/// The `list` output: one line per experiment with the dataset it
/// reproduces.
pub fn list_experiments() -> String {
    let mut out = String::from("experiment      reproduces\n");
    for e in Experiment::ALL {
        let _ = writeln!(out, "{:<15} {}", e.name(), e.reproduces());
    }
    out
}
