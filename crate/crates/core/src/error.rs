use thiserror::Error;

/// Errors produced by the numerical kernels, the model-based inversion
/// machinery and the data-driven estimator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("no left inverse at delay {delay}: residual {residual:e}")]
    NoLeftInverse { delay: usize, residual: f64 },

    #[error("gain does not invert the system: residual {residual:e}")]
    InvalidGain { residual: f64 },

    #[error(
        "trajectory is inconsistent with the data: residual {residual:e} (allowed {allowed:e})"
    )]
    InconsistentTrajectory { residual: f64, allowed: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("input is not persistently exciting of order {order}: rank {achieved} < {required}")]
    NotPersistentlyExciting {
        order: usize,
        required: usize,
        achieved: usize,
    },

    #[error("Rosenbrock pencil is singular for every z (system is not left invertible)")]
    SingularPencil,

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
