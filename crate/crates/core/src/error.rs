use thiserror::Error;

use crate::instance::Mode;

/// Errors produced by the evaluation laboratory.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SbfeError {
    #[error("{what} has {n} variables, above the cap of {cap}")]
    SizeExceeded { what: &'static str, n: usize, cap: usize },
    #[error("operation requires {expected:?} mode")]
    ModeMismatch { expected: Mode },
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("formula is not a read-once DNF")]
    NotReadOnceDnf,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("parameter error: {0}")]
    ParameterError(String),
    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SbfeError>;
