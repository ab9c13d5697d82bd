use thiserror::Error;

/// Errors produced anywhere in the sampling pipeline.
#[derive(Debug, Error)]
pub enum OitError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("density must be strictly positive (found {value} at node {index})")]
    NonPositive { index: usize, value: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("orientation lost at step {step}: min Jacobian determinant {min_det:.3e} (try more time steps)")]
    OrientationLoss { step: usize, min_det: f64 },

    #[error("numerical blowup at step {step}: {what}")]
    NumericalBlowup { step: usize, what: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OitError>;
