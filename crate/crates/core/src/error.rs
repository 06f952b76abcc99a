use thiserror::Error;

use crate::lattice::LatticePoint;

/// Errors raised by the exact and numerical layers of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands disagree on dimension or truncation order.
    #[error("operand mismatch: {0}")]
    Mismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The exhaustive walk search would exceed the configured work limit.
    #[error("work limit exceeded: about {estimated} walk-steps requested, limit is {limit}")]
    WorkLimit { estimated: u128, limit: u128 },

    #[error("numerical failure: {message} (achieved error estimate {achieved:.3e})")]
    Numeric { message: String, achieved: f64 },

    /// An exact identity failed at coefficient `z^order` and site `point`.
    #[error("verification failed at order {order}, x = {point}: lhs = {lhs}, rhs = {rhs}")]
    Verification {
        order: usize,
        point: LatticePoint,
        lhs: String,
        rhs: String,
    },

    #[error("degenerate decomposition: {0}")]
    Degenerate(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("serialization: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Mismatch(_) => "mismatch",
            Error::Precondition(_) => "precondition",
            Error::WorkLimit { .. } => "work_limit",
            Error::Numeric { .. } => "numeric",
            Error::Verification { .. } => "verification",
            Error::Degenerate(_) => "degenerate",
            Error::Internal(_) => "internal",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
