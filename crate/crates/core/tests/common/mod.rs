#![allow(dead_code)]

use gpim::gp::KernelParams;
use gpim::regulator::{InternalModelParams, ObserverParams, StabilizerParams};
use gpim::vtol::{ExoVariant, LoopParams, VtolParams};

/// Reference-table loop parameters (input gain ℒ = 20).
pub fn table_loop(variant: ExoVariant) -> LoopParams<f64> {
    LoopParams {
        vtol: VtolParams::reference(),
        variant,
        internal_model: InternalModelParams::new(2.0, vec![15.0, 70.0]).unwrap(),
        observer: ObserverParams::new(20.0, 20.0, 2.0).unwrap(),
        stabilizer: StabilizerParams::scalar(250.0, 150.0, vec![15.0, 75.0, 125.0], 20.0),
        kernel: KernelParams::reference(2),
        sigma_thr2: 0.1,
        capacity: 100,
        baseline_forgetting: 1.0,
        baseline_p0: 1.0,
        baseline_p_cap: 1e4,
    }
}

/// Reduced gains used for long horizons.
pub fn desk_loop(variant: ExoVariant) -> LoopParams<f64> {
    LoopParams {
        internal_model: InternalModelParams::new(0.25, vec![15.0, 70.0]).unwrap(),
        stabilizer: StabilizerParams::scalar(5.0, 20.0, vec![15.0, 75.0, 125.0], 20.0),
        ..table_loop(variant)
    }
}
