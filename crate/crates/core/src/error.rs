use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the PSQ pipeline.
#[derive(Debug, Error)]
pub enum PsqError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("invalid UTF-8 input: {0}")]
    Decode(#[from] std::str::Utf8Error),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("malformed index: {0}")]
    Format(String),

    #[error("sweep cell {cell} failed: {source}")]
    SweepCell {
        cell: String,
        #[source]
        source: Box<PsqError>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl PsqError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PsqError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        origin: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        PsqError::Parse {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = PsqError> = std::result::Result<T, E>;
