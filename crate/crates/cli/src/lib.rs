//! Command-line front-end: reads a TOML run configuration, dispatches to the
//! emulator and writes deterministic CSV files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult};

use config::CouplingModelName;

#[derive(Debug, Parser)]
#[command(
    name = "mslz",
    version,
    about = "Multistate Landau-Zener sweep emulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply to everything not given.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub coupling_model: Option<CouplingModelName>,
    /// Use only the first N configured modes.
    #[arg(long, global = true, value_name = "N")]
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Population map P_q(t; t_rise): sweep.csv
    Sweep,
    /// Final population against the analytic formula: lzcurve.csv
    Lzcurve,
    /// Initial Fock-number scan: fock.csv
    Fock,
    /// Bias-tee pulse predistortion: predistort.csv
    Predistort,
    /// IQ-plane population projection: iqproject.csv
    Iqproject,
    /// Offset search between two sweep maps: calibrate_offset.csv
    CalibrateOffset,
}

/// Configuration after applying command-line overrides.
pub fn effective_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(model) = cli.coupling_model {
        config.system.coupling_model = model;
    }
    if let Some(n) = cli.modes {
        config.system.n_modes = Some(n);
    }
    Ok(config)
}

fn dispatch(command: Command, config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    match command {
        Command::Sweep => commands::cmd_sweep(config, out),
        Command::Lzcurve => commands::cmd_lzcurve(config, out),
        Command::Fock => commands::cmd_fock(config, out),
        Command::Predistort => commands::cmd_predistort(config, out),
        Command::Iqproject => commands::cmd_iqproject(config, out),
        Command::CalibrateOffset => commands::cmd_calibrate_offset(config, out),
    }
}

pub fn execute(cli: &Cli) -> CliResult<PathBuf> {
    let config = effective_config(cli)?;
    // validate before any work
    config.system.build(None)?;
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cli.out.display())))?;
    pool.install(|| dispatch(cli.command, &config, &cli.out))
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("mslz: {e}");
            e.exit_code()
        }
    }
}
