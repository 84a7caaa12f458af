//! The `apienergy` command line: argument handling, revision-directory
//! ingestion and the four commands.

pub mod commands;
pub mod layout;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

/// Prefix of the environment variables that stand in for global flags.
pub const ENV_PREFIX: &str = "APIENERGY_";

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// An output file could not be written.
    Io = 1,
    /// Bad usage, configuration, synth spec or directory layout.
    Usage = 2,
    /// An input file does not parse.
    Parse = 3,
    /// Energy could not be attributed (e.g. a trace outlasts its power stream).
    Attribution = 4,
    /// Outputs were written but a statistic is degenerate.
    Degenerate = 5,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn new(status: ExitStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ExitStatus::Usage, message)
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ExitStatus::Parse, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(ExitStatus::Io, format!("cannot write {}: {err}", path.display()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "apienergy", version, about = "API utilization vs. energy across library revisions")]
pub struct Cli {
    /// Analysis configuration file (TOML).
    #[arg(long, global = true, env = "APIENERGY_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Significance level; overrides the config file.
    #[arg(long, global = true, env = "APIENERGY_ALPHA", value_name = "X")]
    pub alpha: Option<f64>,

    /// Worker threads for per-execution analysis (default: all cores).
    #[arg(long, global = true, env = "APIENERGY_JOBS", value_name = "N")]
    pub jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "APIENERGY_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one revision directory (`traces/` + `power/`).
    Analyze { dir: PathBuf },
    /// Compare every revision below a root directory.
    Evolve { root: PathBuf },
    /// Generate a synthetic fixture from a TOML spec.
    Synth { spec: PathBuf, out: PathBuf },
    /// Render the revision CSV and a text summary from earlier outputs.
    Report { dir: PathBuf },
}

/// Runs a parsed command line and returns the exit status to use.
pub fn run(cli: Cli) -> Result<ExitStatus, CliError> {
    let settings = commands::Settings::resolve(&cli)?;
    match &cli.command {
        Command::Analyze { dir } => commands::analyze(dir, &settings),
        Command::Evolve { root } => commands::evolve(root, &settings),
        Command::Synth { spec, out } => commands::synth(spec, out),
        Command::Report { dir } => commands::report(dir, &settings),
    }
}
