//! Command-line front end of the attractorlab simulator.
//!
//! Every subcommand reads one `key = value` configuration (see [`config`]),
//! runs an experiment, and writes `report.txt` plus a CSV table into the
//! output directory. Exit codes: 0 when every verdict passes, 2 when a
//! verdict fails, 1 on any fault.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{run_command, Outcome};
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};

/// Environment variable overriding the default output directory.
pub const OUT_ENV: &str = "ATTRACTORLAB_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "attractorlab",
    version,
    about = "Spectral-Galerkin simulator for a nonlocal delay equation"
)]
pub struct Cli {
    /// Configuration file of `key = value` lines; defaults when omitted.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $ATTRACTORLAB_OUT, then `attractorlab-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write `plot.svg`.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Logarithmic y axis for the plot.
    #[arg(long, global = true)]
    pub log_y: bool,
    /// Comma-separated trajectory columns to plot.
    #[arg(long, global = true, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Worker threads for experiments that run several trajectories.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Integrate the full equation and record norms against the absorbing radius.
    Simulate,
    /// Split into dissipative and remainder parts.
    Decompose {
        /// Post-transient window start after `tau` (default: five delay lengths).
        #[arg(long)]
        window_start: Option<f64>,
    },
    /// Spread of solutions at a fixed time for earlier and earlier starts.
    Pullback {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-5,-10,-20,-40"
        )]
        taus: Vec<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        t_star: f64,
    },
    /// Compare the `H¹_t` delay-window norm with its envelope.
    Regularity {
        /// Keep only forcing modes with eigenvalue at most this cutoff.
        #[arg(long)]
        lowpass: Option<f64>,
        #[arg(long)]
        window_start: Option<f64>,
    },
    /// Response to shrinking perturbations of the initial history.
    Depend {
        #[arg(long, value_delimiter = ',', default_value = "1e-2,5e-3,2.5e-3")]
        sizes: Vec<f64>,
        /// Observation time (default: tau + 5).
        #[arg(long, allow_hyphen_values = true)]
        t_star: Option<f64>,
    },
    /// One standard run per value of a model parameter.
    Sweep {
        /// One of delay.b, delay.k, a.m, a.M, f.kappa, forcing.amplitude.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
    },
    /// Evaluate every bound and check it against a default run.
    VerifyBounds,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Decompose { .. } => "decompose",
            Command::Pullback { .. } => "pullback",
            Command::Regularity { .. } => "regularity",
            Command::Depend { .. } => "depend",
            Command::Sweep { .. } => "sweep",
            Command::VerifyBounds => "verify-bounds",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] attractorlab::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

/// Resolves the output directory from the flag, then the environment.
pub fn output_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("attractorlab-out"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Runs a parsed command line, writes every output file, and returns
/// whether all verdicts passed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    if !cli.svg && (cli.log_y || !cli.columns.is_empty()) {
        return Err(CliError::Usage("--log-y and --columns need --svg".into()));
    }
    let cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    for w in &cfg.warnings {
        eprintln!("{w}");
    }
    let dir = output_dir(cli);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    let outcome = run_command(&cfg, &cli.command)?;
    for (name, contents) in &outcome.files {
        write_file(&dir, name, contents)?;
    }
    write_file(&dir, "report.txt", &outcome.report.render())?;
    if cli.svg {
        let columns: Vec<&str> = cli.columns.iter().map(String::as_str).collect();
        let svg = outcome.plot(&columns, cli.log_y).map_err(CliError::Usage)?;
        write_file(&dir, "plot.svg", &svg)?;
    }
    for f in outcome.report.failures() {
        eprintln!("failed: {f}");
    }
    Ok(outcome.report.passed())
}

/// Full entry point: parses `args`, runs, and maps the result to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
