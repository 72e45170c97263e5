//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by estimators, generators and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A hyperparameter or argument is outside its valid range.
    #[error("invalid parameter: {0}")]
    Param(String),
    /// A nearest-neighbour ratio has a zero denominator (duplicate points).
    #[error("degenerate ratio at point {point}: r_{rank} = 0")]
    DegenerateRatio { point: usize, rank: usize },
    /// The input carries no usable information for the estimator.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative solver did not converge within its iteration cap.
    #[error("no convergence: {0}")]
    NonConvergent(String),
    /// A symmetric positive-definite factorisation failed.
    #[error("matrix not positive definite enough at pivot {index} (squared pivot {pivot:e})")]
    Conditioning { index: usize, pivot: f64 },
    /// No run of the log-log magnitude curve is flat enough to fit a slope.
    #[error("no linear region of length >= {min_len} below curvature threshold {threshold}")]
    NoLinearRegion { min_len: usize, threshold: f64 },
    /// The estimator id is not in the registry.
    #[error("unknown estimator '{0}'")]
    UnknownEstimator(String),
    /// The dataset name is not recognised.
    #[error("unknown dataset '{0}'")]
    UnknownDataset(String),
    /// A configuration key is not part of the estimator schema, or its value is malformed.
    #[error("schema violation for key '{key}': {reason}")]
    Schema { key: String, reason: String },
    /// Calibration data is absent or does not match the input.
    #[error("calibration: {0}")]
    Calibration(String),
    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
