use gpim::gp::{GpPosterior, KernelParams};
use gpim::hybrid::{simulate, FnSystem, IntegratorConfig};
use gpim::linalg::Matrix;
use gpim::regulator::{
    build_f_h_c, check_sigma_condition, companion_matrix, control_action, internal_model_flow, is_hurwitz,
    mu_total_derivative, observer_flow, BaselineIdentifier, InternalModelParams, ObserverParams, StabilizerParams,
    StructureParams,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.nrows(), m.ncols(), m.as_slice())
}

fn max_real_eig(m: &Matrix<f64>) -> f64 {
    to_na(m)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

#[test]
fn table_coefficient_sets_have_stable_companions() {
    for coeffs in [vec![15.0, 75.0, 125.0], vec![15.0, 70.0]] {
        assert!(is_hurwitz(&coeffs));
        assert!(max_real_eig(&companion_matrix(&coeffs)) < 0.0);
    }
}

proptest! {
    #![proptest_config(cfg(500))]

    #[test]
    fn routh_test_agrees_with_eigenvalues(coeffs in proptest::collection::vec(-3.0..12.0f64, 1..=6)) {
        let re = max_real_eig(&companion_matrix(&coeffs));
        prop_assume!(re.abs() > 1e-7);
        prop_assert_eq!(is_hurwitz(&coeffs), re < 0.0, "max Re = {}", re);
    }

    #[test]
    fn companion_eigenvalues_are_roots(coeffs in proptest::collection::vec(-3.0..3.0f64, 1..=5)) {
        for z in to_na(&companion_matrix(&coeffs)).complex_eigenvalues().iter() {
            // monic polynomial evaluated by Horner
            let mut acc = nalgebra::Complex::new(1.0, 0.0);
            let mut scale = 1.0f64;
            for &a in &coeffs {
                acc = acc * z + a;
                scale = scale * z.norm().max(1.0) + a.abs();
            }
            prop_assert!(acc.norm() <= 1e-8 * scale, "residual {}", acc.norm());
        }
    }

    #[test]
    fn eta_gain_is_chi_gain_through_output_map(
        chains in proptest::collection::vec(1usize..=4, 1..=3),
        l in 0.1..10.0f64,
        delta in 0.1..5.0f64,
        eta1 in proptest::collection::vec(-2.0..2.0f64, 3),
    ) {
        let n_e = chains.len();
        let s = StructureParams::new(n_e, chains.clone(), 2, n_e).unwrap();
        let c: Vec<Vec<f64>> = chains.iter().map(|&n| (0..n).map(|k| 1.0 + k as f64).collect()).collect();
        let stab = StabilizerParams::new(l, delta, c, Matrix::identity(n_e));
        let ke = stab.k_eta(&s);
        let kc = stab.k_chi(&s).matmul(&build_f_h_c::<f64>(&s).2.transpose());
        prop_assert_eq!(ke.as_slice(), kc.as_slice());
        let (_, _, cm) = build_f_h_c::<f64>(&s);
        let eta1 = &eta1[..n_e];
        let chi = cm.tr_mul_vec(eta1);
        let zero_chi = vec![0.0; s.chi_dim()];
        let zeta = vec![0.0; n_e];
        let a = control_action(&zero_chi, &zeta, eta1, &stab, &s);
        let b = control_action(&chi, &zeta, &vec![0.0; n_e], &stab, &s);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn observer_error_poles_scale_with_rho(m1 in 0.5..30.0f64, m2 in 0.5..30.0f64, rho in 0.1..10.0f64) {
        let p = ObserverParams::new(m1, m2, rho).unwrap();
        // linearisation of the innovation dynamics, read off the flow map
        let col = |x1: f64, x2: f64| {
            let (a, b) = observer_flow(&[x1], &[x2], &[0.0], &[0.0], &p);
            [a[0], b[0]]
        };
        let (c1, c2) = (col(1.0, 0.0), col(0.0, 1.0));
        let a = Matrix::from_row_slice(2, 2, &[c1[0], c2[0], c1[1], c2[1]]);
        let unit = Matrix::from_row_slice(2, 2, &[-m1, 1.0, -m2, 0.0]);
        let mut ea: Vec<_> = to_na(&a).complex_eigenvalues().iter().map(|z| (z.re, z.im.abs())).collect();
        let mut eu: Vec<_> = to_na(&unit).complex_eigenvalues().iter().map(|z| (z.re * rho, z.im.abs() * rho)).collect();
        ea.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eu.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ea.iter().zip(&eu) {
            prop_assert!(x.0 < 0.0);
            prop_assert!((x.0 - y.0).abs() < 1e-8 * rho * (m1 + m2) && (x.1 - y.1).abs() < 1e-8 * rho * (m1 + m2));
        }
    }

    #[test]
    fn internal_model_flow_is_linear(
        a in proptest::collection::vec(-5.0..5.0f64, 5),
        b in proptest::collection::vec(-5.0..5.0f64, 5),
        g in 0.1..3.0f64,
    ) {
        let p = InternalModelParams::new(g, vec![15.0, 70.0]).unwrap();
        let f = |v: &[f64]| internal_model_flow(&v[0..2], &[v[2]], &[v[3]], &p);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (fa, fb, fs) = (f(&a), f(&b), f(&sum));
        prop_assert_eq!(f(&[0.0; 4]), vec![0.0, 0.0]);
        for i in 0..2 {
            prop_assert!((fs[i] - fa[i] - fb[i]).abs() <= 1e-12 * (fa[i].abs() + fb[i].abs()).max(1.0));
        }
    }

    #[test]
    fn threshold_window_is_open_interval(sp in 0.1..5.0f64, sn in 0.001..1.0f64, thr in 0.0..6.0f64) {
        let k = KernelParams::new(sp, sn, vec![0.1, 0.1], 2.0).unwrap();
        let c = check_sigma_condition(&k, thr);
        prop_assert_eq!(c.holds, sp * sn / (sp + sn) < thr && thr < sp);
    }

    #[test]
    fn baseline_gain_stays_symmetric_positive_definite(
        seq in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..200),
        forgetting in 0.5..1.0f64,
    ) {
        let mut id = BaselineIdentifier::<f64>::new(2, 1, 1.0, forgetting);
        for (a, b, y) in seq {
            id.step(&[a, b], &[y]);
        }
        prop_assert!(id.p.is_symmetric());
        let ev = to_na(&id.p).symmetric_eigen().eigenvalues;
        prop_assert!(ev.iter().all(|&v| v > 0.0), "{ev:?}");
    }
}

#[test]
fn observer_converges_to_constant_signal() {
    let p = ObserverParams::new(20.0, 20.0, 2.0).unwrap();
    let eta_d = 1.7;
    let sys = FnSystem::new(2, move |_t, x: &[f64], dx: &mut [f64]| {
        let (a, b) = observer_flow(&[x[0]], &[x[1]], &[eta_d], &[0.0], &p);
        dx[0] = a[0];
        dx[1] = b[0];
    });
    let mut sys = sys;
    let c = IntegratorConfig {
        t_end: 10.0,
        ..IntegratorConfig::default()
    };
    let arc = simulate(&mut sys, &[0.0, 0.0], &c).unwrap();
    let x = arc.final_state().unwrap();
    assert!((x[0] - eta_d).abs() < 1e-8 && x[1].abs() < 1e-8, "{x:?}");
}

#[test]
fn baseline_leaves_residual_on_nonlinear_data() {
    let mut id = BaselineIdentifier::<f64>::new(2, 1, 1.0, 1.0);
    let mut residual = 0.0;
    for k in 0..3000 {
        let t = k as f64 * 0.01;
        let eta = [t.sin(), (1.3 * t).cos()];
        let y = (3.0 * eta[0]).sin() * eta[1].exp();
        if k >= 2000 {
            residual += (y - id.predict(&eta)[0]).abs() / 1000.0;
        }
        id.step(&eta, &[y]);
    }
    assert!(residual > 0.05, "{residual}");
}

fn trained_posterior() -> GpPosterior<f64> {
    let k = KernelParams::new(1.0, 0.01, vec![0.5, 0.5], 2.0).unwrap();
    let mut post = GpPosterior::prior(k, 30, 1).unwrap();
    for i in 0..30 {
        let s = i as f64 * 0.2;
        post.push(vec![s.sin() * 0.6, s.cos() * 0.6], vec![(2.0 * s).sin()], 0.05).unwrap();
    }
    post
}

#[test]
fn mu_rate_matches_trajectory_differences() {
    let im = InternalModelParams::new(0.5, vec![15.0, 70.0]).unwrap();
    let post = trained_posterior();
    let flow_post = post.clone();
    let flow_im = im.clone();
    let e = |t: f64| 0.05 * (3.0 * t).sin();
    let mut sys = FnSystem::new(3, move |t, x: &[f64], dx: &mut [f64]| {
        let mu = flow_post.mean(&x[0..2], x[2]).unwrap();
        let eta_dot = internal_model_flow(&x[0..2], &[e(t)], &mu, &flow_im);
        dx[0] = eta_dot[0];
        dx[1] = eta_dot[1];
        dx[2] = 1.0;
    });
    let c = IntegratorConfig {
        t_end: 0.5,
        tol_rel: 1e-12,
        tol_abs: 1e-13,
        sample_dt: 1e-3,
        ..IntegratorConfig::default()
    };
    let arc = simulate(&mut sys, &[0.3, -0.2, 0.0], &c).unwrap();
    let seg = &arc.segments[0];
    let mut checked = 0;
    for k in (1..seg.len() - 1).step_by(25) {
        let (t0, t1) = (seg.times[k - 1], seg.times[k + 1]);
        let mu = |x: &[f64]| post.mean(&x[0..2], x[2]).unwrap()[0];
        let fd = (mu(&seg.states[k + 1]) - mu(&seg.states[k - 1])) / (t1 - t0);
        let x = &seg.states[k];
        let m = post.mean(&x[0..2], x[2]).unwrap();
        let an = mu_total_derivative(&post, &x[0..2], x[2], &[e(seg.times[k])], &m, &im)[0];
        assert!((an - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "t={} {an} vs {fd}", seg.times[k]);
        checked += 1;
    }
    assert!(checked >= 15);
}
