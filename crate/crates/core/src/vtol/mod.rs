//! Lateral VTOL testbed.
//!
//! The plant is simulated in the coordinates `χ₁ = y₁`, `χ₂ = y₂`,
//! `χ₃ = d − 𝒈 tan θ₁`, `ζ = L_s d − 𝒈 θ₂ / cos² θ₁`, where it is a triple
//! integrator driven by `ζ̇ = q(w, x) + Ω(w, x) u`. These coordinates are
//! globally defined, so the closed loop never meets the `θ₁ = ±π/2`
//! singularity of the raw model.

mod closed_loop;
mod plant;

pub use closed_loop::{assemble_closed_loop, ClosedLoop, LoopParams, RegulatorChoice, StateLayout};
pub use plant::{
    disturbance, exo_flow, from_transformed, ideal_friend, ideal_friend_printed, q_omega, to_transformed,
    transformed_flow, vtol_control_law, vtol_control_transformed, vtol_raw_flow, Disturbance, ExoVariant,
    RawState, VtolError, VtolParams,
};
