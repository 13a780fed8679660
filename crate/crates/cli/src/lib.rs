//! Command-line front end: `extract`, `decompose`, `evaluate` and `sweep`.
//!
//! [`run`] does all the work and returns the process exit code, so tests can
//! drive it in-process with captured output.

mod commands;
mod config;
mod metrics;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use metrics::Metrics;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "msdecomp",
    version,
    about = "Propose microservice boundaries for a monolithic codebase"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a source tree and write its facts file (classes, lexical items, call counts).
    Extract {
        /// Root of the source tree.
        root: PathBuf,
        /// Directory for facts.json; prints to stdout when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "java-like")]
        profile: String,
    },
    /// Cluster classes at increasing epsilon and report on the final layer.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tuning: TuningArgs,
        /// Ground-truth services; adds precision and success rates to the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Writes hierarchy.json, hierarchy.dot, decomposition.json and the report here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Report format; `dot` prints the hierarchy graph instead of a report.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Score a decomposition or hierarchy file against the facts.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        /// decomposition.json or hierarchy.json from `decompose`.
        decomposition: PathBuf,
        /// Hierarchy layer to score (default: final layer).
        #[arg(long)]
        layer: Option<usize>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Vary one hyper-parameter with the others fixed and tabulate the metrics.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tuning: TuningArgs,
        #[arg(long, value_enum, default_value_t = SweepParam::MaxEpsilon)]
        param: SweepParam,
        /// First value (default: 0, or 1 for min-samples).
        #[arg(long)]
        from: Option<f64>,
        /// Last value (default: 1, or 4 for min-samples).
        #[arg(long)]
        to: Option<f64>,
        /// Increment (default: 0.05 for max-epsilon, 0.1 for alpha, 1 for min-samples).
        #[arg(long)]
        by: Option<f64>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Facts file, or a source directory to scan first.
    pub input: PathBuf,
    /// Language profile used when the input is a directory.
    #[arg(long, default_value = "java-like")]
    pub profile: String,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    /// Weight of structural similarity (semantic gets 1 - alpha).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.7)]
    pub max_epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 2)]
    pub min_samples: usize,
    /// Extra stopwords, one per line, on top of the built-in list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

impl From<&TuningArgs> for RunConfig {
    fn from(t: &TuningArgs) -> Self {
        RunConfig {
            alpha: t.alpha,
            max_epsilon: t.max_epsilon,
            step: t.step,
            min_samples: t.min_samples,
            stopwords: t.stopwords.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    MaxEpsilon,
    Alpha,
    MinSamples,
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
        }
    }
}

impl From<msdecomp::Error> for CliError {
    fn from(e: msdecomp::Error) -> Self {
        use msdecomp::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_) | E::UnsupportedProfile(_) => CliError::Usage(msg),
            E::EmptyProject(_) | E::DegenerateVocabulary => CliError::Degenerate(msg),
            _ => CliError::Input(msg),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match commands::dispatch(&cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
