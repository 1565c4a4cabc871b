use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mask {bits:#b} has bits outside a ground set of size {n}")]
    InvalidMask { bits: u64, n: usize },

    #[error("element {0} is already in the set")]
    ElementPresent(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("monotonicity violation at step {step}: element {element} has marginal {gain}")]
    MonotonicityViolation {
        step: usize,
        element: usize,
        gain: String,
    },

    #[error("submodularity violation at step {step}: marginal of element {element} rose from {bound} to {gain}")]
    SubmodularityViolation {
        step: usize,
        element: usize,
        bound: String,
        gain: String,
    },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
