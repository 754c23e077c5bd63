use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(aerprov::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Carries the full report so it can still be printed.
    #[error("at least one assessed link is infeasible")]
    Infeasible { report: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(aerprov::Error::Io(_)) | CliError::Io { .. } => 4,
            CliError::Model(_) => 2,
            CliError::Infeasible { .. } => 3,
        }
    }
}

impl From<aerprov::Error> for CliError {
    fn from(e: aerprov::Error) -> Self {
        CliError::Model(e)
    }
}
