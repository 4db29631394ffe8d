use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while decoding PGM/PFM files.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("unsupported magic number {0:?}")]
    UnsupportedMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
}

#[derive(Debug, Error)]
pub enum Error {
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
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("padding margin {margin} exceeds the smallest image side {limit}")]
    MarginTooLarge { margin: usize, limit: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("image with {pixels} pixels is too large for a dense weight matrix (limit {limit})")]
    ImageTooLarge { pixels: usize, limit: usize },
    #[error("blur kernel is not symmetric about its center")]
    NonSymmetricKernel,
    #[error("non-finite values in the iterate at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("implementations disagree: {0}")]
    Mismatch(String),
    #[error("conjugate gradient breakdown at iteration {iteration}: curvature {curvature:e}")]
    CgBreakdown { iteration: usize, curvature: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
