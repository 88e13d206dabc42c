use std::path::PathBuf;

use crate::io::FormatError;

/// Process exit codes by failure class.
pub mod exit_code {
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const SEQUENCING: i32 = 4;
    pub const INVALID_INPUT: i32 = 5;
    pub const VERIFY: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] tpsmooth_core::Error),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, source: FormatError) -> Self {
        AppError::Format { path: path.into(), source }
    }

    pub fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Schema { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        use tpsmooth_core::Error as E;
        match self {
            AppError::Io { .. } | AppError::Format { .. } | AppError::Json { .. } | AppError::Schema { .. } => {
                exit_code::IO
            }
            AppError::Config(_) | AppError::Core(E::Config(_)) => exit_code::CONFIG,
            AppError::Core(E::Sequencing(_)) => exit_code::SEQUENCING,
            AppError::Core(_) => exit_code::INVALID_INPUT,
            AppError::Verify(_) => exit_code::VERIFY,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
