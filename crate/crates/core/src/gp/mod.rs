//! Streaming Gaussian-process identifier.
//!
//! Samples `(η, ξ₂, τ)` are admitted into a fixed-capacity shift buffer at
//! jump instants. The kernel multiplies a squared-exponential term in `η` by an
//! exponential forgetting term in the elapsed time between two points, so old
//! samples lose influence as the clock advances.

mod buffer;
mod kernel;
mod posterior;

pub use buffer::{Sample, SampleBuffer};
pub use kernel::{kernel_eval, KernelParams, KernelPoint};
pub use posterior::{GpPosterior, Prediction};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid kernel parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: String },
    #[error("sample rejected: {0}")]
    InvalidSample(String),
    #[error("buffer index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("negative elapsed time {0} between kernel points (corrupted buffer)")]
    NegativeElapsed(f64),
    #[error("internal error: Gram matrix factorization failed: {0}")]
    Factorization(#[from] LinalgError),
}

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<(), GpError> {
    if expected == got {
        Ok(())
    } else {
        Err(GpError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
