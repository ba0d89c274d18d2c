use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid range: lo ({lo}) must be strictly less than hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid delay {0}: must be at least 1")]
    InvalidDelay(i64),

    #[error("non-finite value at step {step}: {what}")]
    NonFinite { step: usize, what: &'static str },

    #[error("empty input")]
    Empty,

    #[error("snapshot: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
