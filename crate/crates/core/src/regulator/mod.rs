//! Internal-model regulator building blocks.

mod baseline;
mod hurwitz;
pub(crate) mod internal_model;
mod stabilizer;
mod structure;

pub use baseline::BaselineIdentifier;
pub use hurwitz::{companion_matrix, is_hurwitz};
pub use internal_model::{
    check_sigma_condition, internal_model_flow, mu_total_derivative, observer_flow, InternalModelParams,
    ObserverParams, SigmaCondition,
};
pub use stabilizer::{control_action, StabilizerParams};
pub use structure::{build_f_h_c, StructureParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegulatorError {
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("polynomial with coefficients {name} is not Hurwitz")]
    NotHurwitz { name: String },
    #[error("input matrix must have full column rank")]
    RankDeficient,
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

pub(crate) fn positive<T: crate::Scalar>(name: &'static str, v: T) -> Result<(), RegulatorError> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(RegulatorError::NonPositive {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}
