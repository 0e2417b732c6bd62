//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("instrument level {level} has no observations")]
    EmptyGroup { level: usize },

    #[error("contrast pair ({i}, {k}) touches an instrument level with no observations")]
    EmptyGroupInPair { i: usize, k: usize },

    #[error("system is underidentified: rank {rank} < {needed} unknowns")]
    Underidentified {
        rank: usize,
        needed: usize,
        /// Basis vectors spanning the unidentified directions.
        null_basis: Vec<Vec<f64>>,
    },

    #[error("bandwidth selection failed: {0}")]
    Bandwidth(String),

    #[error("weak instrument: {0}")]
    WeakInstrument(String),

    #[error("too few valid points: {got} < {needed} ({context})")]
    TooFewValidPoints {
        got: usize,
        needed: usize,
        context: String,
    },

    #[error("curve coverage too poor: {dropped:.1}% of samples fall outside the valid region")]
    PoorCoverage { dropped: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("estimator does not apply to this dataset kind: {0}")]
    RegimeMismatch(String),
}
