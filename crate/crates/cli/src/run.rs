use std::time::Instant;

use gpim::hybrid::{dwell_time_monitor, simulate, DwellReport, HybridError};
use gpim::vtol::{assemble_closed_loop, ExoVariant, RegulatorChoice, StateLayout, VtolError};
use gpim::HybridArcF64;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot assemble closed loop: {0}")]
    Assemble(#[from] VtolError),
    #[error("integration failed: {0}")]
    Integration(#[from] HybridError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Process exit code: 2 for anything rejected before simulation, 3 for
    /// failures during integration or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Assemble(_) => 2,
            RunError::Integration(_) | RunError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub regulator: RegulatorChoice,
    pub exosystem: ExoVariant,
    pub t_end: f64,
    pub t_final: f64,
    pub tail_fraction: f64,
    /// sup |e| over recorded samples with `t ≥ (1 − tail_fraction)·t_end`.
    pub tail_sup_e: f64,
    /// sup |e| over recorded samples with `t ≤ tail_fraction·t_end`.
    pub head_sup_e: f64,
    pub jump_count: usize,
    pub zeno: bool,
    pub dwell: DwellReport<f64>,
    pub final_buffer_len: usize,
    /// Smallest `Ω·ℒ_A` over recorded samples.
    pub min_detectability: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub wall_clock_s: f64,
}

pub struct RunOutput {
    pub arc: HybridArcF64,
    pub summary: RunSummary,
    pub layout: StateLayout,
}

/// Validates, assembles and simulates one configuration. Nothing is written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let mut sys = assemble_closed_loop(cfg.loop_params(), cfg.regulator)?;
    let layout = sys.layout();
    let mut x0 = sys.initial_state(cfg.initial.w0);
    x0[layout.chi()].copy_from_slice(&cfg.initial.chi0);
    x0[layout.zeta()] = cfg.initial.zeta0;
    if !cfg.initial.eta0.is_empty() {
        x0[layout.eta()].copy_from_slice(&cfg.initial.eta0);
    }
    x0[layout.xi1()] = cfg.initial.xi0[0];
    x0[layout.xi2()] = cfg.initial.xi0[1];

    let started = Instant::now();
    let arc = simulate(&mut sys, &x0, &cfg.sim)?;
    let wall_clock_s = started.elapsed().as_secs_f64();
    let summary = summarize(cfg, &arc, wall_clock_s);
    Ok(RunOutput { arc, summary, layout })
}

pub fn summarize(cfg: &ExperimentConfig, arc: &HybridArcF64, wall_clock_s: f64) -> RunSummary {
    let (tail_sup_e, head_sup_e) = error_envelopes(arc, cfg.sim.t_end, cfg.tail_fraction);
    let witness = arc.output_index("omega_l").expect("closed-loop outputs");
    let min_detectability = arc
        .samples()
        .map(|(_, _, _, y, _)| y[witness])
        .fold(f64::INFINITY, f64::min);
    RunSummary {
        regulator: cfg.regulator,
        exosystem: cfg.exosystem,
        t_end: cfg.sim.t_end,
        t_final: arc.t_final(),
        tail_fraction: cfg.tail_fraction,
        tail_sup_e,
        head_sup_e,
        jump_count: arc.jump_count(),
        zeno: arc.zeno,
        dwell: dwell_time_monitor(arc, cfg.gp.sigma_thr2),
        final_buffer_len: arc.jumps.last().map_or(0, |j| j.discrete_len),
        min_detectability,
        steps_accepted: arc.steps_accepted,
        steps_rejected: arc.steps_rejected,
        wall_clock_s,
    }
}

/// `(tail, head)` suprema of `|e|` over the recorded samples.
pub fn error_envelopes(arc: &HybridArcF64, t_end: f64, fraction: f64) -> (f64, f64) {
    let e = arc.output_index("e").expect("closed-loop outputs");
    let tail_start = (1.0 - fraction) * t_end;
    let head_end = fraction * t_end;
    let mut tail = 0.0f64;
    let mut head = 0.0f64;
    for (t, _, _, y, _) in arc.samples() {
        let a = y[e].abs();
        if t >= tail_start {
            tail = tail.max(a);
        }
        if t <= head_end {
            head = head.max(a);
        }
    }
    (tail, head)
}
