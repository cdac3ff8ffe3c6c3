//! Simulation of hybrid systems `ẋ = f(x)` on `C`, `x⁺ = g(x)` on `D`.
//!
//! Flow and jump sets are both described by a scalar event function: the
//! state is in `D` when it is `≥ 0` and in `C` when it is `≤ 0`. On the
//! boundary the jump is taken. Flows are integrated with an adaptive
//! Dormand-Prince 5(4) pair; upward zero crossings of the event function are
//! located by bisection on the continuous extension of each step.

mod arc;
mod dopri;
mod engine;
mod monitor;
mod system;

pub use arc::{FlowSegment, HybridArc, JumpRecord};
pub use engine::{execute_jump, integrate_flow, simulate, ExitReason, FlowOutcome, IntegratorConfig};
pub use monitor::{dwell_time_monitor, DwellReport};
pub use system::{FnSystem, HybridSystem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("step size underflow at t = {t:e} (h = {h:e}); state: {state:?}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("non-finite derivative at t = {t:e}; state: {state:?}")]
    NonFinite { t: f64, state: Vec<f64> },
    #[error("jump requested outside the jump set (event value {value:e} at t = {t:e})")]
    JumpOutsideJumpSet { t: f64, value: f64 },
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("jump map failed: {0}")]
    Jump(String),
}
