//! Batch runner for the testbed experiments: configuration, simulation,
//! CSV export and GP-versus-baseline comparison.

pub mod compare;
pub mod config;
pub mod export;
pub mod run;

pub use compare::{compare, Comparison};
pub use config::{ConfigError, ExperimentConfig, Preset};
pub use run::{run_experiment, RunError, RunOutput, RunSummary};
