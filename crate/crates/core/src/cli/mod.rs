//! Command-line front end: `arl train|theory|sweep <config> [key=value…]`.
//!
//! Exit codes: 0 success, 1 I/O or other runtime failure, 2 bad config or
//! invocation, 3 non-finite training state, 4 theory disagreement.

mod commands;
mod config;

pub use commands::{
    cmd_sweep, cmd_theory, cmd_train, BiasCaseReport, MeanStd, SeedSummary, SweepMetrics, SweepOutcome, SweepRow,
    TheoryCaseReport, TheoryReport, TrainSummary,
};
pub use config::{
    canonical_key, ConfigError, ConfigIssue, CsvSource, Origin, DataSource, RunConfig, StrategyName, SweepAxis, TheoryConfig,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::DataError;
use crate::model::ModelError;
use crate::theory::TheoryError;
use crate::train::TrainError;

/// Environment variable that relocates every output directory under a
/// common root.
pub const OUTPUT_ROOT_ENV: &str = "ARL_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_CONFIG: i32 = 2;
pub const EXIT_NON_FINITE: i32 = 3;
pub const EXIT_THEORY_DISAGREEMENT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config {path}:\n{error}")]
    Config { path: PathBuf, error: ConfigError },
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("training aborted (seed {seed}): {source}")]
    Train {
        seed: u64,
        #[source]
        source: TrainError,
    },
    #[error("theory: {0}")]
    Theory(#[from] TheoryError),
    #[error("theory disagreement in {} case(s):\n{}", .0.len(), .0.join("\n"))]
    TheoryDisagreement(Vec<String>),
    #[error("{} sweep cell(s) failed:\n{}", .failed.len(), .failed.join("\n"))]
    SweepCells { failed: Vec<String>, non_finite: bool },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::ConfigRead { .. } => EXIT_BAD_CONFIG,
            CliError::Data(_) | CliError::Model(_) => EXIT_BAD_CONFIG,
            CliError::Train { source, .. } => match source {
                TrainError::NonFinite { .. } => EXIT_NON_FINITE,
                TrainError::InvalidOptimizer(_) | TrainError::Incompatible(_) => EXIT_BAD_CONFIG,
                _ => EXIT_FAILURE,
            },
            CliError::SweepCells { non_finite: true, .. } => EXIT_NON_FINITE,
            CliError::TheoryDisagreement(_) => EXIT_THEORY_DISAGREEMENT,
            CliError::Theory(_) | CliError::SweepCells { .. } | CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

/// Where outputs go. With a root set, a relative `run.output_dir` is placed
/// under it and an absolute one contributes only its final component.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputRoot(pub Option<PathBuf>);

impl OutputRoot {
    pub fn from_env() -> Self {
        Self(std::env::var_os(OUTPUT_ROOT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }

    pub fn resolve(&self, dir: &Path) -> PathBuf {
        match &self.0 {
            None => dir.to_path_buf(),
            Some(root) if dir.is_absolute() => match dir.file_name() {
                Some(name) => root.join(name),
                None => root.clone(),
            },
            Some(root) => root.join(dir),
        }
    }
}

pub const USAGE: &str = "usage:
  arl train <config> [key=value ...]
  arl theory <config> [key=value ...]
  arl sweep <config> [key=value ...]

Outputs go to run.output_dir (relocated under $ARL_OUTPUT_ROOT when set).";

/// Runs the CLI on `args` (without the program name) and returns the
/// process exit code.
pub fn run(args: &[String]) -> i32 {
    let root = OutputRoot::from_env();
    let Some((command, rest)) = args.split_first() else {
        eprintln!("{USAGE}");
        return EXIT_BAD_CONFIG;
    };
    if matches!(command.as_str(), "-h" | "--help" | "help") {
        println!("{USAGE}");
        return EXIT_OK;
    }
    let Some((config_path, overrides)) = rest.split_first() else {
        eprintln!("missing config path\n{USAGE}");
        return EXIT_BAD_CONFIG;
    };
    let config_path = Path::new(config_path);
    let result = match command.as_str() {
        "train" => cmd_train(config_path, overrides, &root).map(|s| {
            println!(
                "trained {} seed(s); test accuracy {:.4} ± {:.4}, macro-F1 {:.4} ± {:.4}; outputs in {}",
                s.seeds.len(),
                s.test_accuracy.mean,
                s.test_accuracy.std,
                s.test_macro_f1.mean,
                s.test_macro_f1.std,
                s.output_dir.display()
            );
        }),
        "theory" => cmd_theory(config_path, overrides, &root).map(|r| {
            println!(
                "{} variance case(s) agree, {} bias case(s) evaluated; report in {}",
                r.cases.len(),
                r.bias_cases.len(),
                r.report_path.display()
            );
        }),
        "sweep" => cmd_sweep(config_path, overrides, &root).map(|s| {
            println!("{} sweep cell(s) finished; results in {}", s.rows.len(), s.results_path.display());
        }),
        other => Err(CliError::Usage(format!("unknown command '{other}'\n{USAGE}"))),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
