use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the defense pipeline and its tooling.
#[derive(Debug, Error)]
pub enum AsdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("unsupported image format: {}", .0.display())]
    UnsupportedFormat(PathBuf),

    #[error("failed to decode {}: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error: {0}")]
    Codec(String),

    #[error("detector error: {0}")]
    Detector(String),

    #[error("detector failed at level {level}: {message}")]
    Aggregation { level: u32, message: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AsdError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> AsdError {
    AsdError::InvalidInput(msg.into())
}
