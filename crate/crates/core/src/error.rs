use thiserror::Error;

use crate::fitness::EvaluatorError;
use crate::gp::GpError;
use crate::linalg::LinalgError;
use crate::nflt::NfltError;

/// Errors raised by the continuous-domain optimization layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty interval in dimension {dim}: lower {lower} is not below upper {upper}")]
    EmptyInterval { dim: usize, lower: f64, upper: f64 },

    #[error("evaluation budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },

    #[error("target value {target} already reached")]
    TargetReached { target: f64 },

    #[error("point lies outside the search domain (coordinate {dim} = {value})")]
    OutOfDomain { dim: usize, value: f64 },

    #[error("algorithm state has not been initialized for a domain")]
    StateNotInitialized,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("evaluator failed: {0}")]
    Evaluator(#[from] EvaluatorError),

    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error(transparent)]
    Gp(#[from] GpError),

    #[error(transparent)]
    Nflt(#[from] NfltError),
}

pub type Result<T> = std::result::Result<T, Error>;
