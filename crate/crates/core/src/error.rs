//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by construction, validation and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhsError {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input violates a structural invariant (symmetry, definiteness, rank...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A field or state is outside the domain of the operator it is applied to.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// A matrix that must be inverted is singular to working precision.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// An iterative method failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A structural assumption required by a family or stability routine does not hold.
    #[error("assumption violated: {0}")]
    Assumption(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PhsError>;
