use std::path::PathBuf;

use nievergelt_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Run(#[from] CoreError),

    #[error("{source}\nhint: {hint}")]
    Fit { source: CoreError, hint: String },

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed report: {0}")]
    Format(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl CliError {
    /// 2 for bad arguments or inputs, 1 for failures during a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(e) => match e {
                CoreError::InvalidArgument(_)
                | CoreError::NonIntegerStepCount { .. }
                | CoreError::BadGrid(_)
                | CoreError::LengthMismatch { .. } => 2,
                _ => 1,
            },
            CliError::Fit { .. } | CliError::Io { .. } | CliError::Format(_) => 1,
        }
    }
}
