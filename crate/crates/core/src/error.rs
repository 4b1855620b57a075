//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("cluster `{cluster_id}` contains both treated and control participants")]
    MixedArmCluster { cluster_id: String },
    #[error("covariate vectors have inconsistent lengths (expected {expected}, record {index} has {found})")]
    RaggedCovariates {
        expected: usize,
        index: usize,
        found: usize,
    },
    #[error("outcome for record {index} is {value} but the dataset is declared binary")]
    NonBinaryOutcome { index: usize, value: f64 },
    #[error("record {index} has a non-finite {field}")]
    NonFiniteValue { index: usize, field: &'static str },
    #[error("record {index} has arm {value}; arms must be 0 or 1")]
    InvalidArm { index: usize, value: f64 },
    #[error("record {index} has non-positive weight {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("{context}: need at least {needed} units, have {available}")]
    TooFewUnits {
        context: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("learner library is empty")]
    EmptyLibrary,
    #[error("design matrix mismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{what} did not converge after {iterations} iterations (criterion {criterion:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        criterion: f64,
        /// Last parameter iterate, so callers can inspect or salvage the fit.
        last_iterate: Vec<f64>,
    },
    #[error("arm {arm} has no observations")]
    DegenerateArm { arm: u8 },
    #[error("{scale} scale requires strictly positive arm means{extra}; got psi1={psi1}, psi0={psi0}")]
    NonPositiveMean {
        scale: &'static str,
        extra: &'static str,
        psi1: f64,
        psi0: f64,
    },
    #[error("variance must be non-negative, got {0}")]
    NonPositiveVariance(f64),
    #[error("no truth available for {0}")]
    NoTruth(&'static str),
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
