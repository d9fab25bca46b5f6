use thiserror::Error;

/// Errors raised by the operator, frame and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not self-adjoint (defect {defect:e} > tol {tol:e})")]
    NotSelfAdjoint { defect: f64, tol: f64 },

    #[error("operator is not positive definite (smallest eigenvalue {min_eig:e} <= tol {tol:e})")]
    NotPositiveDefinite { min_eig: f64, tol: f64 },

    #[error("operator is not non-negative (smallest eigenvalue {min_eig:e})")]
    NotNonNegative { min_eig: f64 },

    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("family is not a g-frame (lower bound {lower:e} <= tol {tol:e})")]
    NotAFrame { lower: f64, tol: f64 },

    #[error("commutation hypothesis violated: {0}")]
    CommutationViolated(String),

    #[error("preconditioned solve requires C' = C")]
    AsymmetricController,

    #[error("iteration did not converge after {iterations} steps (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid frame bounds A = {lower}, B = {upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certificate mismatch on load: stored ({stored_m}, {stored_upper}), recomputed ({m}, {upper})")]
    CertificateMismatch {
        stored_m: f64,
        stored_upper: f64,
        m: f64,
        upper: f64,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
