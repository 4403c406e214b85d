//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// An iterative or adaptive computation failed to settle.
    #[error("no convergence in {what}: last change {change:.3e} exceeds tolerance {tol:.3e}")]
    NonConvergence { what: String, change: f64, tol: f64 },

    /// Population escaped the truncated Fock space beyond the allowed threshold.
    #[error("truncation leakage {leakage:.3e} exceeds threshold {threshold:.3e}")]
    Leakage { leakage: f64, threshold: f64 },

    /// A vector expected to be normalized is not.
    #[error("vector norm {norm:.12} deviates from one")]
    Normalization { norm: f64 },

    /// A non-finite value appeared in a computation.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
