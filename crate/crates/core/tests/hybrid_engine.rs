mod common;

use gpim::hybrid::{dwell_time_monitor, execute_jump, simulate, FnSystem, HybridSystem, IntegratorConfig};
use gpim::vtol::{assemble_closed_loop, ExoVariant, RegulatorChoice};
use proptest::prelude::*;

fn config(t_end: f64) -> IntegratorConfig<f64> {
    IntegratorConfig {
        t_end,
        ..IntegratorConfig::default()
    }
}

fn timer(period: f64) -> FnSystem<f64> {
    FnSystem::new(1, |_t, _x: &[f64], d: &mut [f64]| d[0] = 1.0)
        .with_event(move |x: &[f64]| x[0] - period)
        .with_jump(|x: &mut [f64]| x[0] = 0.0)
}

#[test]
fn timer_dwell_statistics() {
    let mut sys = timer(1.0);
    let arc = simulate(&mut sys, &[0.0], &config(3.5)).unwrap();
    let times: Vec<f64> = arc.jumps.iter().map(|j| j.t).collect();
    assert_eq!(times.len(), 3);
    for (k, t) in times.iter().enumerate() {
        assert!((t - (k + 1) as f64).abs() <= 1e-9, "{t}");
    }
    let r = dwell_time_monitor(&arc, 1.0);
    assert!((r.t_min.unwrap() - 1.0).abs() < 1e-9 && (r.t_max.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn bouncing_ball_first_impact() {
    // height, velocity; impact when falling through zero height
    let g = 9.81;
    let mut sys = FnSystem::new(2, move |_t, x: &[f64], d: &mut [f64]| {
        d[0] = x[1];
        d[1] = -g;
    })
    .with_event(|x: &[f64]| if x[1] < 0.0 { -x[0] } else { -1.0 })
    .with_jump(|x: &mut [f64]| {
        x[0] = 0.0;
        x[1] = -0.8 * x[1];
    });
    let arc = simulate(&mut sys, &[1.0, 0.0], &config(1.5)).unwrap();
    let first = (2.0 / g).sqrt();
    assert!((arc.jumps[0].t - first).abs() < 1e-9);
    let second = first + 2.0 * 0.8 * g * first / g;
    assert!((arc.jumps[1].t - second).abs() < 1e-7, "{} vs {second}", arc.jumps[1].t);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn timer_arcs_tile_the_horizon(period in 0.05..1.0f64, t_end in 0.0..5.0f64) {
        let mut sys = timer(period);
        let c = config(t_end);
        let arc = simulate(&mut sys, &[0.0], &c).unwrap();
        prop_assert!(arc.is_well_formed());
        if t_end > 0.0 {
            prop_assert_eq!(arc.t_final(), t_end);
            prop_assert_eq!(arc.segments[0].start(), 0.0);
        }
        for w in arc.segments.windows(2) {
            prop_assert_eq!(w[0].end(), w[1].start());
            prop_assert_eq!(w[1].j, w[0].j + 1);
        }
        for (k, j) in arc.jumps.iter().enumerate() {
            prop_assert_eq!(j.j, k + 1);
            prop_assert!(j.bracket <= c.event_tol);
            prop_assert!(j.event_pre >= 0.0);
            let expect = (k + 1) as f64 * period;
            prop_assert!((j.t - expect).abs() <= 1e-9 * (k + 1) as f64, "{} vs {}", j.t, expect);
        }
    }
}

#[test]
fn regulator_jump_resets_clock_and_admits_sample() {
    let mut sys = assemble_closed_loop(common::table_loop(ExoVariant::Linear), RegulatorChoice::Gp).unwrap();
    let l = sys.layout();
    let mut x = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
    x[l.tau()] = 3.0;
    x[l.eta().start] = 0.4;
    let post = execute_jump(&mut sys, 3.0, &x).unwrap();
    assert_eq!(post[l.tau()], 0.0);
    assert_eq!(&post[l.eta()], &x[l.eta()]);
    assert_eq!(sys.discrete_len(), 1);
    let bound = sys.params().kernel.training_point_variance();
    assert!(sys.monitor(&post) <= bound + 1e-15);
}

#[test]
fn regulator_buffer_evicts_at_capacity() {
    let mut p = common::table_loop(ExoVariant::Linear);
    p.capacity = 3;
    let mut sys = assemble_closed_loop(p, RegulatorChoice::Gp).unwrap();
    let l = sys.layout();
    let mut x = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
    for k in 0..5 {
        x[l.eta().start] = k as f64;
        x[l.tau()] = 1.0;
        x = execute_jump(&mut sys, k as f64, &x).unwrap();
    }
    let post = sys.posterior().unwrap();
    assert_eq!(post.len(), 3);
    assert_eq!(post.buffer().get(0).unwrap().eta[0], 2.0);
    assert_eq!(post.buffer().admitted(), 5);
}

#[test]
fn jump_outside_jump_set_is_rejected() {
    let mut sys = assemble_closed_loop(common::table_loop(ExoVariant::Linear), RegulatorChoice::Gp).unwrap();
    let mut x = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
    x = execute_jump(&mut sys, 0.0, &x).unwrap();
    assert!(execute_jump(&mut sys, 0.0, &x).is_err());
}

#[test]
fn regulator_run_opens_with_a_jump_and_dwells() {
    let mut sys = assemble_closed_loop(common::table_loop(ExoVariant::Linear), RegulatorChoice::Gp).unwrap();
    let x0 = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
    let c = IntegratorConfig {
        t_end: 0.5,
        tol_rel: 1e-6,
        tol_abs: 1e-8,
        max_step: 1e-2,
        step_initial: 1e-9,
        ..IntegratorConfig::default()
    };
    let arc = simulate(&mut sys, &x0, &c).unwrap();
    assert!(arc.is_well_formed());
    assert_eq!(arc.jumps[0].t, 0.0);
    assert_eq!(arc.segments[0].len(), 1);
    let r = dwell_time_monitor(&arc, 0.1);
    assert!(r.jumps >= 2 && r.ok(), "{r:?}");
    assert!(r.max_post_jump.unwrap() < 0.1);
    assert!(!arc.zeno);
}

#[test]
fn closed_loop_runs_are_bit_identical() {
    let run = || {
        let mut sys = assemble_closed_loop(common::desk_loop(ExoVariant::Duffing), RegulatorChoice::Gp).unwrap();
        let x0 = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
        simulate(&mut sys, &x0, &config(0.5)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.jumps.len(), b.jumps.len());
    for (sa, sb) in a.segments.iter().zip(&b.segments) {
        assert_eq!(sa.times, sb.times);
        assert_eq!(sa.states, sb.states);
    }
}

#[test]
fn baseline_loop_never_jumps() {
    let mut sys = assemble_closed_loop(common::desk_loop(ExoVariant::Arctan), RegulatorChoice::Baseline).unwrap();
    let x0 = sys.initial_state([1.0, 0.0, 1.0, 0.0]);
    let arc = simulate(&mut sys, &x0, &config(2.0)).unwrap();
    assert_eq!(arc.jump_count(), 0);
    assert_eq!(arc.segments.len(), 1);
}
