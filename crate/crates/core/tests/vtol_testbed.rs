mod common;

use gpim::hybrid::{simulate, FnSystem, IntegratorConfig};
use gpim::vtol::{
    assemble_closed_loop, disturbance, exo_flow, from_transformed, ideal_friend, ideal_friend_printed, q_omega,
    to_transformed, transformed_flow, vtol_raw_flow, ExoVariant, RawState, RegulatorChoice, VtolParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exo_arc(variant: ExoVariant, w0: [f64; 4], t_end: f64, tol: f64) -> gpim::HybridArcF64 {
    let mut sys = FnSystem::new(4, move |_t, w: &[f64], d: &mut [f64]| d.copy_from_slice(&exo_flow(w, variant)));
    let c = IntegratorConfig {
        t_end,
        tol_rel: tol,
        tol_abs: tol,
        sample_dt: 0.05,
        ..IntegratorConfig::default()
    };
    simulate(&mut sys, &w0, &c).unwrap()
}

/// Time derivative of `(χ, ζ)` from the raw derivatives by differentiating the
/// coordinate change by hand.
fn pushed_forward(x: &RawState<f64>, raw_dot: &[f64; 4], w: &[f64], v: ExoVariant, p: &VtolParams<f64>) -> [f64; 4] {
    let dist = disturbance(w, v, p);
    let g = p.grav;
    let c = x.theta1.cos();
    let s = x.theta1.sin();
    let chi3_dot = dist.ls_d - g * raw_dot[2] / (c * c);
    let zeta_dot = dist.ls2_d - g * raw_dot[3] / (c * c) - 2.0 * g * x.theta2 * raw_dot[2] * s / (c * c * c);
    [raw_dot[0], raw_dot[1], chi3_dot, zeta_dot]
}

#[test]
fn raw_and_transformed_flows_agree() {
    let p = VtolParams::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let v = ExoVariant::ALL[k % 3];
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = RawState {
            y1: rng.gen_range(-5.0..5.0),
            y2: rng.gen_range(-5.0..5.0),
            theta1: rng.gen_range(-1.2..1.2),
            theta2: rng.gen_range(-2.0..2.0),
        };
        let u = rng.gen_range(-1e3..1e3);
        let raw = vtol_raw_flow(&x, &w, u, v, &p).unwrap();
        let expect = pushed_forward(&x, &raw, &w, v, &p);
        let (chi, zeta) = to_transformed(&x, &disturbance(&w, v, &p), &p).unwrap();
        let (chi_dot, zeta_dot) = transformed_flow(&chi, zeta, &w, u, v, &p);
        let got = [chi_dot[0], chi_dot[1], chi_dot[2], zeta_dot];
        for i in 0..4 {
            let rel = (got[i] - expect[i]).abs() / expect[i].abs().max(1.0);
            worst = worst.max(rel);
        }
        let back = from_transformed(&chi, zeta, &disturbance(&w, v, &p), &p);
        assert!((back.theta1 - x.theta1).abs() < 1e-12 && (back.theta2 - x.theta2).abs() < 1e-9 * x.theta2.abs().max(1.0));
    }
    assert!(worst <= 1e-8, "worst relative error {worst}");
}

#[test]
fn raw_flow_refuses_the_singularity() {
    let p = VtolParams::reference();
    let x = RawState {
        y1: 0.0,
        y2: 0.0,
        theta1: std::f64::consts::FRAC_PI_2,
        theta2: 0.0,
    };
    assert!(vtol_raw_flow(&x, &[0.0; 4], 0.0, ExoVariant::Linear, &p).is_err());
}

/// Largest deviation of the `(w₁, w₂)` and `(w₃, w₄)` first integrals over 100 s.
fn drift(v: ExoVariant, tol: f64) -> (f64, f64) {
    let w0 = [1.0, 0.0, 1.0, 0.0];
    let arc = exo_arc(v, w0, 100.0, tol);
    let (e12, e34) = (v.energy_12(&w0), ExoVariant::energy_34(&w0));
    arc.samples().fold((0.0f64, 0.0f64), |acc, (_, _, w, _, _)| {
        (
            acc.0.max((v.energy_12(w) - e12).abs()),
            acc.1.max((ExoVariant::energy_34(w) - e34).abs()),
        )
    })
}

#[test]
fn unit_frequency_oscillator_energy_within_ten_tolerances() {
    let tol = 1e-10;
    assert!(drift(ExoVariant::Linear, tol).0 <= 10.0 * tol);
}

#[test]
fn first_integral_drift_is_proportional_to_tolerance() {
    for v in ExoVariant::ALL {
        let (a, b) = (drift(v, 1e-8), drift(v, 1e-12));
        for (coarse, fine) in [(a.0, b.0), (a.1, b.1)] {
            let ratio = coarse / fine;
            assert!((1e3..=1e5).contains(&ratio), "{v}: {coarse:e} -> {fine:e}");
        }
    }
}

#[test]
fn linear_exosystem_is_a_harmonic_oscillator() {
    let arc = exo_arc(ExoVariant::Linear, [1.0, 0.0, 0.0, 0.0], std::f64::consts::PI, 1e-12);
    assert!((arc.final_state().unwrap()[0] + 1.0).abs() < 1e-6);
}

#[test]
fn disturbance_derivatives_match_trajectory_differences() {
    let p = VtolParams::reference();
    for v in ExoVariant::ALL {
        let arc = exo_arc(v, [1.0, 0.3, 1.0, -0.5], 5.0, 1e-13);
        let seg = &arc.segments[0];
        for k in (1..seg.len() - 1).step_by(7) {
            let dt = seg.times[k + 1] - seg.times[k - 1];
            let at = |i: usize| disturbance(&seg.states[i], v, &p);
            let fd1 = (at(k + 1).d - at(k - 1).d) / dt;
            let fd2 = (at(k + 1).ls_d - at(k - 1).ls_d) / dt;
            let scale = at(k).d.abs() + at(k).ls_d.abs() + at(k).ls2_d.abs();
            assert!((fd1 - at(k).ls_d).abs() < 1e-2 * scale, "{v} first");
            assert!((fd2 - at(k).ls2_d).abs() < 1e-2 * scale, "{v} second");
        }
    }
}

#[test]
fn friend_zeroes_the_regulator_equation_residual() {
    let p = VtolParams::reference();
    for v in ExoVariant::ALL {
        let arc = exo_arc(v, [1.0, 0.0, 1.0, 0.0], 20.0, 1e-10);
        for (_, _, w, _, _) in arc.samples() {
            let dist = disturbance(w, v, &p);
            let (q, omega) = q_omega(0.0, 0.0, &dist, &p);
            let r = q + omega * ideal_friend(w, v, &p);
            assert!(r.abs() <= 1e-6, "{v}: residual {r}");
        }
    }
}

#[test]
fn printed_friend_agrees_only_where_disturbance_is_stationary() {
    let p = VtolParams::reference();
    assert_eq!(ideal_friend_printed(&[0.0; 4], ExoVariant::Linear, &p), 0.0);
    let w: [f64; 4] = [1.0, 0.0, 1.0, 0.0];
    assert!((ideal_friend(&w, ExoVariant::Linear, &p) - ideal_friend_printed(&w, ExoVariant::Linear, &p)).abs() < 1e-12);
    let w: [f64; 4] = [1.0, 0.5, 1.0, 0.3];
    let (a, b): (f64, f64) = (
        ideal_friend(&w, ExoVariant::Linear, &p),
        ideal_friend_printed(&w, ExoVariant::Linear, &p),
    );
    assert!((a - b).abs() > 1e-3 * a.abs());
}

#[test]
fn detectability_witness_is_positive_along_runs() {
    for v in ExoVariant::ALL {
        for choice in [RegulatorChoice::Gp, RegulatorChoice::Baseline] {
            let mut sys = assemble_closed_loop(common::desk_loop(v), choice).unwrap();
            let x0 = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
            let c = IntegratorConfig {
                t_end: 2.0,
                max_step: 1e-2,
                ..IntegratorConfig::default()
            };
            let arc = simulate(&mut sys, &x0, &c).unwrap();
            let i = arc.output_index("omega_l").unwrap();
            assert!(arc.samples().all(|(_, _, _, y, _)| y[i] > 0.0), "{v} {choice:?}");
        }
    }
}

