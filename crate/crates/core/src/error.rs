use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {id} out of range (graph has {len} vertices)")]
    InvalidVertex { id: usize, len: usize },

    #[error("resource limit exceeded: {limit} (requested {requested}, allowed {allowed})")]
    ResourceLimit {
        limit: &'static str,
        requested: u64,
        allowed: u64,
    },

    #[error("solver did not converge: {method} stopped after {iterations} iterations with relative residual {residual:e}")]
    Solver {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("refinement failed at level {level}, hop {hop}: {reason}")]
    Refinement {
        level: usize,
        hop: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
