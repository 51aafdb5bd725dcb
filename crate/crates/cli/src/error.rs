use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("no load case named '{name}'; available: {}", available.join(", "))]
    MissingCase { name: String, available: Vec<String> },

    #[error(transparent)]
    Solver(#[from] energy_pile::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => 2,
            CliError::MissingCase { .. } | CliError::Solver(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
