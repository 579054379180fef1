//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors, 3 when the
//! detector hits its iteration limit.

pub mod bench;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::data::DataError;
use crate::detector::DetectError;
use crate::metrics::MetricsError;
use crate::synth::SynthError;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Detect(DetectError::NonConvergence { .. }) => EXIT_NON_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "secoda",
    version,
    about = "Anomaly detection for mixed categorical and numerical data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every case of a CSV file.
    Detect(DetectArgs),
    /// Write a labeled synthetic dataset.
    Generate(GenerateArgs),
    /// Compare scores against labels.
    Evaluate(EvaluateArgs),
    /// Time detector variants on nested subsets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RangeArg {
    Working,
    Global,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Schema JSON; inferred from the whole file when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value_t = 0.003)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0.95)]
    pub prune_quantile: f64,
    #[arg(long)]
    pub no_prune: bool,
    /// Grow the arity by one in every iteration.
    #[arg(long)]
    pub no_step: bool,
    /// Average constellation frequencies with equal weights.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long, value_enum, default_value = "working")]
    pub range: RangeArg,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: u32,
    /// Cell value read as missing; repeatable. Defaults to "" and "NA".
    #[arg(long = "missing-token")]
    pub missing_tokens: Vec<String>,
    /// Per-iteration trace as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Scores CSV (case_id,aas,rank).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub top: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub kind: String,
    /// Number of cases; defaults to the kind's reference size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the output path with a `.labels.csv` extension.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Lower specificity bound of the partial AUC (upper bound 1).
    #[arg(long, default_value_t = 0.9)]
    pub partial_spec: f64,
    /// Lower sensitivity bound of the partial AUC (upper bound 1).
    #[arg(long, default_value_t = 0.9)]
    pub partial_sens: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of equally spaced FPR values in the ROC band.
    #[arg(long, default_value_t = 101)]
    pub band_points: usize,
    /// Metrics JSON; printed to standard output when omitted.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub roc_out: Option<PathBuf>,
    #[arg(long)]
    pub pr_out: Option<PathBuf>,
    #[arg(long)]
    pub band_out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, conflicts_with = "kind")]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub schema: Option<PathBuf>,
    /// `case_id,label` file for the input; synthetic data carries its own.
    #[arg(long, requires = "input")]
    pub labels: Option<PathBuf>,
    #[arg(long = "missing-token", requires = "input")]
    pub missing_tokens: Vec<String>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "final,pruneless,stepless"
    )]
    pub variants: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub fractions: usize,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Result table CSV; printed to standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
