use thiserror::Error;

/// Errors surfaced by the sketching and verification routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A vector or matrix has the wrong dimension for the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A parameter lies outside the domain of an analytic formula.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// The subgaussian parameter regime required by a bound does not hold.
    /// The message names the violated inequality.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    /// An internal numerical post-check failed.
    #[error("numerical check failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
