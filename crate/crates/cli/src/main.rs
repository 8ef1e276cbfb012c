//! `fluxbus`: coupling calculators and state-transfer experiments for the
//! flux-qubit mediated spin-ensemble / resonator circuit.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 numerical
//! contract violation (non-convergence, residual too large).

mod commands;
mod config;
mod csv;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use fluxbus_core::dynamics::{
    DEFAULT_CONVERGENCE_TOL, DEFAULT_CUTOFF_CAP, ENSEMBLE_REFERENCE_FREQUENCY_MHZ,
};
use fluxbus_core::fntransform::{BOUNDARY_MARGIN, DEFAULT_RESIDUAL_TOL};
use fluxbus_core::physpar::constants::TABLE;

use crate::commands::{Command, Report, CONSERVATION_ENERGY_REL_TOL, CONSERVATION_NORM_TOL};
use crate::config::Config;
use crate::csv::fmt_g;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fluxbus", version, about)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV files and manifest.txt.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Suppress the summary on standard output.
    #[arg(long)]
    quiet: bool,
}

fn load(args: &Args) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for spec in &args.set {
        cfg.apply_override(spec)?;
    }
    Ok(cfg)
}

fn manifest(args: &Args, cfg: &Config, report: &Report) -> String {
    let mut entries: Vec<(String, String)> = vec![
        ("run.command".into(), args.command.as_str().into()),
        ("run.version".into(), env!("CARGO_PKG_VERSION").into()),
        (
            "run.config".into(),
            args.config
                .as_ref()
                .map_or("(defaults)".into(), |p| p.display().to_string()),
        ),
        ("defaults.boundary_margin".into(), BOUNDARY_MARGIN.to_string()),
        ("defaults.residual_tol".into(), fmt_g(DEFAULT_RESIDUAL_TOL)),
        ("defaults.convergence_tol".into(), fmt_g(DEFAULT_CONVERGENCE_TOL)),
        ("defaults.cutoff_cap".into(), DEFAULT_CUTOFF_CAP.to_string()),
        ("defaults.conservation_norm_tol".into(), fmt_g(CONSERVATION_NORM_TOL)),
        (
            "defaults.conservation_energy_rel_tol".into(),
            fmt_g(CONSERVATION_ENERGY_REL_TOL),
        ),
        (
            "defaults.ensemble_reference_frequency_mhz".into(),
            fmt_g(ENSEMBLE_REFERENCE_FREQUENCY_MHZ),
        ),
    ];
    for (name, value, unit) in TABLE {
        entries.push((format!("constants.{name}"), fmt_g(*value)));
        entries.push((format!("constants.{name}.unit"), (*unit).into()));
    }
    entries.extend(cfg.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    entries.extend(report.derived.iter().cloned());
    entries.sort();
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = load(args)?;
    let report = commands::run(args.command, &cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    for (name, table) in &report.tables {
        write(&args.out.join(name), &table.render())?;
    }
    write(&args.out.join("manifest.txt"), &manifest(args, &cfg, &report))?;
    if !args.quiet {
        for line in &report.summary {
            println!("{line}");
        }
        for (name, table) in &report.tables {
            println!("wrote {} ({} rows)", args.out.join(name).display(), table.len());
        }
    }
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(report.violations.join("; ")))
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fluxbus: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
