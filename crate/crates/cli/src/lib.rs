//! Command-line front end for `qcollide`.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qcollide::Error> for CliError {
    fn from(e: qcollide::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcollide", version, about = "Random-collision decoherence of a qubit against a two-qubit environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One trajectory; all observables per step (trajectory.csv).
    Simulate,
    /// Running time averages of one trajectory (timeavg.csv).
    Timeavg,
    /// Ensemble means and std errors with exponential fits (ensemble.csv, fit.csv).
    Ensemble,
    /// Pauli-weight Markov chain spectrum and predicted purity (spectrum.csv, markov.csv, markov_purity.csv).
    Markov,
    /// Late-time histograms next to the random-state oracle (hist_*.csv).
    Hist,
    /// Observables of Haar-random three-qubit states (oracle.csv).
    Oracle,
}

#[derive(Debug, Args)]
struct Flags {
    /// Master seed, decimal or 0x-hex.
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    trajectories: Option<String>,
    /// product, entangled, an amplitude literal, or @FILE.
    #[arg(long, global = true)]
    initial: Option<String>,
    /// random, alternating, fixed:01,02,..., or @FILE with a pair sequence.
    #[arg(long, global = true)]
    policy: Option<String>,
    /// hurwitz or ginibre.
    #[arg(long, global = true)]
    sampler: Option<String>,
    /// Inclusive fit window a:b.
    #[arg(long = "fit-window", global = true)]
    fit_window: Option<String>,
    #[arg(long, global = true)]
    bins: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Haar-random states drawn by the oracle.
    #[arg(long = "oracle-samples", global = true)]
    oracle_samples: Option<String>,
    /// key = value file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn into_overrides(self) -> (Option<PathBuf>, Overrides) {
        (
            self.config,
            Overrides {
                seed: self.seed,
                steps: self.steps,
                trajectories: self.trajectories,
                initial: self.initial,
                policy: self.policy,
                sampler: self.sampler,
                fit_window: self.fit_window,
                bins: self.bins,
                out: self.out,
                workers: self.workers,
                oracle_samples: self.oracle_samples,
            },
        )
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let (config_path, flags) = cli.flags.into_overrides();
    let base = match config_path {
        Some(p) => Overrides::load(&p)?,
        None => Overrides::default(),
    };
    let cfg: RunConfig = base.layered_under(flags).resolve()?;
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::Timeavg => commands::cmd_timeavg(&cfg),
        Command::Ensemble => commands::cmd_ensemble(&cfg),
        Command::Markov => commands::cmd_markov(&cfg),
        Command::Hist => commands::cmd_hist(&cfg),
        Command::Oracle => commands::cmd_oracle(&cfg),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("qcollide: {e}");
            e.exit_code()
        }
    }
}
