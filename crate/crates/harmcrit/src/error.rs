use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{failed} of {total} replicates failed, above the 1% budget")]
    FailureBudget { failed: usize, total: usize },

    #[error("column `{0}` has zero variance")]
    Degenerate(String),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("need at least {need} samples, got {have}")]
    TooFewSamples { need: usize, have: usize },

    #[error("existing output in {} was written by a different configuration", .0.display())]
    ResumeMismatch(PathBuf),

    #[error("malformed rows file: {0}")]
    Rows(String),

    #[error(transparent)]
    Core(#[from] harmcrit_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::ResumeMismatch(_) => 2,
            HarnessError::FailureBudget { .. } => 4,
            _ => 1,
        }
    }

    /// True when stdout was closed by the reader, as in `harmcrit report | head`.
    pub fn is_broken_pipe(&self) -> bool {
        let kind = match self {
            HarnessError::Io(e) => Some(e.kind()),
            HarnessError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            HarnessError::Json(e) => e.io_error_kind(),
            _ => None,
        };
        kind == Some(std::io::ErrorKind::BrokenPipe)
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
