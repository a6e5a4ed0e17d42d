//! Experiment runners behind the `gapcs` command line tool.
//!
//! Each experiment is split into a pure `run_*` function returning structured
//! results and a `write` step emitting CSV files, so tests can assert on the
//! numbers without parsing files back.

pub mod experiments;
pub mod output;
pub mod plot;
pub mod spec;

pub use experiments::{execute, Outcome};
pub use spec::{ExperimentKind, ExperimentSpec};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad flags or configuration; maps to exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gapcs::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },
}

pub type Result<T> = std::result::Result<T, HarnessError>;
