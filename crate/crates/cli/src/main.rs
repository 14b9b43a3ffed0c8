//! `lmi`: simulations, estimates, Fisher tables, Monte-Carlo sweeps and
//! channel calibration from a TOML run configuration.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a computation fails.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmi_core::harness::SweepAxis;
use thiserror::Error;

use config::{parse_grid, RunConfigFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] lmi_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Core(lmi_core::Error::InvalidArgument(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lmi",
    version,
    about = "Light-matter interferometry simulator and estimator benchmark"
)]
struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true, env = "LMI_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the output light state as JSON; `--samples` also writes the shots.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// CSV file for the sampled shots.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Apply every configured estimator to one simulated data set (JSON).
    Estimate {
        #[command(flatten)]
        common: Common,
    },
    /// Fisher information and Cramér-Rao bounds (CSV).
    Fisher {
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo MSE over a parameter grid (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Swept quantity: r, V, T, loss or Phi.
        #[arg(long)]
        axis: Option<String>,
        /// Grid as log:lo:hi:n, lin:lo:hi:n or a comma-separated list.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Estimate the decoherence channel with the process switched off (JSON).
    Calibrate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m_reps: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    /// Output file; defaults to `output.path`, then standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfigFile, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (_, Some(name)) => config::preset(name)?,
            (Some(path), None) => config::load(path)?,
            (None, None) => return Err(CliError::Validation("no configuration given".into())),
        };
        cfg.apply_overrides(self.seed, self.m_reps, self.n_samples)?;
        Ok(cfg)
    }

    fn output(&self, cfg: &RunConfigFile) -> Result<Box<dyn Write>, CliError> {
        match self.out.as_ref().or(cfg.output.path.as_ref()) {
            Some(path) => open(path),
            None => Ok(Box::new(io::stdout().lock())),
        }
    }
}

fn open(path: &Path) -> Result<Box<dyn Write>, CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation(
                "LMI_THREADS must be at least 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate { common, samples } => {
            let cfg = common.load()?;
            let mut shots = samples.as_deref().map(open).transpose()?;
            let dump = commands::simulate(&cfg, shots.as_mut())?;
            if let Some(s) = shots.as_mut() {
                s.flush()?;
            }
            let mut out = common.output(&cfg)?;
            write_json(&mut *out, &dump)?;
            out.flush()?;
        }
        Command::Estimate { common } => {
            let cfg = common.load()?;
            let reports = commands::estimate(&cfg)?;
            let mut out = common.output(&cfg)?;
            write_json(&mut *out, &reports)?;
            out.flush()?;
            let failed: Vec<String> = reports
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.estimator)))
                .collect();
            if !failed.is_empty() {
                return Err(lmi_core::Error::EstimationFailed {
                    reason: failed.join("; "),
                    diagnostics: Default::default(),
                }
                .into());
            }
        }
        Command::Fisher { common } => {
            let cfg = common.load()?;
            let mut out = common.output(&cfg)?;
            commands::fisher(&cfg, &mut *out)?;
            out.flush()?;
        }
        Command::Sweep { common, axis, grid } => {
            let cfg = common.load()?;
            let section = cfg.sweep.as_ref();
            let axis: SweepAxis = match (axis, section) {
                (Some(a), _) => a
                    .parse()
                    .map_err(|e| CliError::Validation(format!("--axis: {e}")))?,
                (None, Some(s)) => cfg.sweep_axis(&s.axis)?,
                (None, None) => {
                    return Err(CliError::Validation(
                        "sweep: no axis given (--axis or sweep.axis)".into(),
                    ))
                }
            };
            let grid = match (grid, section) {
                (Some(g), _) => {
                    parse_grid(&g).map_err(|e| CliError::Validation(format!("--grid: {e}")))?
                }
                (None, Some(s)) => s
                    .grid
                    .values()
                    .map_err(|e| CliError::Validation(format!("sweep.grid: {e}")))?,
                (None, None) => {
                    return Err(CliError::Validation(
                        "sweep: no grid given (--grid or sweep.grid)".into(),
                    ))
                }
            };
            let table = commands::run_sweep(&cfg, axis, &grid)?;
            for warning in commands::unreliable_cells(&table) {
                eprintln!("warning: {warning}");
            }
            let mut out = common.output(&cfg)?;
            commands::write_sweep_csv(&table, &mut *out)?;
            out.flush()?;
        }
        Command::Calibrate { common } => {
            let cfg = common.load()?;
            let report = commands::run_calibrate(&cfg)?;
            let mut out = common.output(&cfg)?;
            write_json(&mut *out, &report)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
