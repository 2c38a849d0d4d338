use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header at byte {offset}: {reason}")]
    MalformedHeader {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: unsupported format: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error(
        "{path}: truncated pixel data at byte {offset} (expected {expected} samples, got {got})"
    )]
    TruncatedPixelData {
        path: PathBuf,
        offset: usize,
        expected: usize,
        got: usize,
    },

    #[error("{path}: bad sample at byte {offset}: {reason}")]
    BadSample {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("size mismatch: {what} has {got} entries, expected {expected}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("edge index {index} out of range (lattice has {count} edges)")]
    EdgeOutOfRange { index: usize, count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
