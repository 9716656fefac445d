use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:.3e}, error {error:.3e} after {intervals} subintervals")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// The restricted symplectic form has no inverse at `z`; the kernel
    /// directions are attached so the caller can project instead.
    #[error("non-symplectic manifold: form has rank {rank} of {dim} at z = {z:?}")]
    DegenerateForm {
        z: Vec<f64>,
        rank: usize,
        dim: usize,
        kernel: Vec<Vec<f64>>,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration aborted at t = {t}: {reason}")]
    IntegrationAborted {
        t: f64,
        last_state: Vec<f64>,
        reason: String,
    },

    #[error("fixture error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
