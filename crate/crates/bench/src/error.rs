use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("no records to write")]
    Empty,
    #[error(transparent)]
    Solver(#[from] ippa_core::Error),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by the caller's input rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            BenchError::Config(_)
                | BenchError::Io { .. }
                | BenchError::Parse { .. }
                | BenchError::Empty
        )
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
