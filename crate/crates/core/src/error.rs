//! Error taxonomy shared by every module of the toolkit.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Malformed argument: wrong shape, bad index range, non-bijective
    /// permutation, and similar caller mistakes.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix asymmetry exceeds the admission tolerance.
    #[error("matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    /// A covariance (or other SPD argument) has a non-positive eigenvalue.
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A majorization precondition does not hold.
    #[error("majorization precondition failed: {0}")]
    NotMajorized(String),

    /// Tolerances are misconfigured relative to the data; e.g. the residual
    /// of a doubly stochastic matrix lost its perfect matching.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// The requested steering is not achievable with the given data.
    #[error("steering infeasible: {0}")]
    Infeasible(String),

    /// Non-finite values appeared during numerical integration.
    #[error("simulation diverged at t = {t}")]
    Divergence { t: f64 },
}
