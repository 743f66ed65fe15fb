//! Command-line front end: `simulate`, `recover` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 recovery failure. Errors are reported as one `error:` line on stderr.

pub mod files;
mod plot;
mod recover;
mod simulate;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use files::{
    from_pairs, to_pairs, Check, Diagnostics, GroundTruth, OperatorTruth, Pair, ProblemFile, ReportFile, SamplerSpec,
    SourceReport, Verification, SCHEMA_VERSION,
};
pub use verify::verify_report;

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Recovery(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) | Self::Io(_) => 2,
            Self::Recovery(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_) | Error::InvalidInput(_) | Error::Unsupported(_) | Error::InsufficientData { .. } => {
                Self::Usage(e.to_string())
            }
            _ => Self::Recovery(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dynspec", version, about = "Spectral identification from dynamical samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic problem file.
    Simulate(SimulateArgs),
    /// Recover spectral data from a problem file.
    Recover(RecoverArgs),
    /// Compare a report against the ground truth of its problem file.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateMode {
    Circulant,
    Diagonalizable,
    Shift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterKind {
    Diffusion,
    Random,
    File,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = SimulateMode::Circulant)]
    pub mode: SimulateMode,
    /// Keep every m-th coordinate.
    #[arg(long, conflicts_with = "omega", required_unless_present = "omega")]
    pub m: Option<usize>,
    /// Comma-separated sampled coordinates.
    #[arg(long, value_delimiter = ',')]
    pub omega: Option<Vec<usize>>,
    /// Number of time levels; defaults to 2m, 2 * sparsity, or 2d.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, env = "DYNSPEC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FilterKind::Random)]
    pub filter: FilterKind,
    /// JSON list of `[re, im]` pairs, used with `--filter file`.
    #[arg(long)]
    pub filter_file: Option<PathBuf>,
    /// Decay rate of the diffusion filter.
    #[arg(long, default_value_t = 0.1)]
    pub decay: f64,
    /// Fourier sparsity of the state (shift mode only).
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long)]
    pub include_truth: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecoverMode {
    Invariant,
    General,
    Extrapolate,
    Prony,
}

impl RecoverMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Invariant => "invariant",
            Self::General => "general",
            Self::Extrapolate => "extrapolate",
            Self::Prony => "prony",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

#[derive(Debug, clap::Args)]
pub struct RecoverArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: RecoverMode,
    /// Order the spectrum as a real, symmetric, decreasing filter.
    #[arg(long)]
    pub assume_symmetric: bool,
    /// Consistency threshold on relative residuals.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relative distance under which roots from different sources merge.
    #[arg(long)]
    pub dedup_tol: Option<f64>,
    /// Snapping distance to the roots of unity (prony mode).
    #[arg(long)]
    pub root_tol: Option<f64>,
    /// Largest annihilator degree per index (general mode).
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Recurrence window L (extrapolate mode).
    #[arg(long)]
    pub window: Option<usize>,
    /// Declared Fourier sparsity (prony mode); defaults to L_total / 2.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Tolerance of the embedded verification block.
    #[arg(long, default_value_t = verify::DEFAULT_TOL)]
    pub verify_tol: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the recovered spectrum as an SVG scatter plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = verify::DEFAULT_TOL)]
    pub tol: f64,
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate::run(&args),
        Command::Recover(args) => recover::run(&args),
        Command::Verify(args) => verify::run(&args),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", line.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
