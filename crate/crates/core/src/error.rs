use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be even and at least 8, got {0}")]
    InvalidGrid(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up at t = {t} (step {step}): max|v| = {max_v:e}, max|d| = {max_d:e}")]
    BlowUp {
        t: f64,
        step: u64,
        max_v: f64,
        max_d: f64,
    },

    #[error("director normalization singular at t = {t} (step {step}): min|d*| = {min_norm:e}")]
    NormalizationSingularity { t: f64, step: u64, min_norm: f64 },

    #[error("unknown initial-data generator `{0}`")]
    UnknownGenerator(String),

    #[error("snapshot {path}: {kind}")]
    Snapshot { path: PathBuf, kind: SnapshotError },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("bad magic (expected ELGL1)")]
    BadMagic,
    #[error("malformed header line `{0}`")]
    BadHeader(String),
    #[error("truncated payload: {missing} bytes missing")]
    Truncated { missing: usize },
    #[error("header declares n = {declared} but the payload holds {found}x{found} fields")]
    SizeMismatch { declared: usize, found: usize },
    #[error("payload has {extra} trailing bytes beyond the declared {n}x{n} fields")]
    TrailingBytes { n: usize, extra: usize },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
