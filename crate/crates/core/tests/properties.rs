use hscale::inexact::{SubsampleConfig, SubsampledHessian};
use hscale::linesearch::ArmijoParams;
use hscale::optimizers::{scaled_gd, RunConfig};
use hscale::oracle::{eval_gradient, eval_hvp, eval_value, OracleCounter};
use hscale::problems::{
    gen_synthetic_classification, hvp_check, grad_check, QuadraticProblem, QuadraticSum, Quartic1D, SyntheticSpec,
};
use hscale::scaling::{
    classify_curvature, select_scaling, spc_scaling, AlternationState, CurvatureFlag, CurvatureProbe, ScalingConfig,
    SpcRule, SpcScaling,
};
use hscale::{Problem, Vector};
use proptest::prelude::*;

fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counter_units_match_tallies(nf in 0usize..20, ng in 0usize..20, nh in 0usize..20) {
        let q = QuadraticProblem::diagonal(&[1.0, 2.0], &[0.5, -1.0]).unwrap();
        let x = Vector::from_column_slice(&[0.3, 0.7]);
        let mut c = OracleCounter::new();
        for _ in 0..nf { eval_value(&q, &x, &mut c).unwrap(); }
        for _ in 0..ng { eval_gradient(&q, &x, &mut c).unwrap(); }
        for _ in 0..nh { eval_hvp(&q, &x, &x, &mut c).unwrap(); }
        prop_assert_eq!(c.units(), (nf + ng + 2 * nh) as f64);
    }

    #[test]
    fn logistic_hvp_is_symmetric(seed in 0u64..1000, u in vec_strategy(6), w in vec_strategy(6), x in vec_strategy(6)) {
        let spec = SyntheticSpec { n: 30, d: 2, classes: 3, separation: 1.0, seed, lambda: 1e-3 };
        let p = gen_synthetic_classification(&spec).unwrap();
        let (u, w, x) = (Vector::from_vec(u), Vector::from_vec(w), Vector::from_vec(x) * 0.2);
        let a = u.dot(&p.hvp(&x, &w).unwrap());
        let b = w.dot(&p.hvp(&x, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn logistic_derivatives_match_finite_differences(seed in 0u64..1000, x in vec_strategy(6)) {
        let spec = SyntheticSpec { n: 25, d: 2, classes: 3, separation: 2.0, seed, lambda: 1e-3 };
        let p = gen_synthetic_classification(&spec).unwrap();
        let x = Vector::from_vec(x) * 0.3;
        let v = Vector::from_fn(6, |i, _| 1.0 - 0.3 * i as f64);
        prop_assert!(grad_check(&p, &x, 1e-5).passed);
        prop_assert!(hvp_check(&p, &x, &v, 1e-5).passed);
    }

    #[test]
    fn spc_scalings_are_ordered(seed in 0u64..10_000, d in 1usize..12, g in vec_strategy(12)) {
        let q = QuadraticProblem::random_spd(d, 0.01, 100.0, seed).unwrap();
        let g = Vector::from_column_slice(&g[..d]);
        prop_assume!(g.norm() > 1e-3);
        let probe = CurvatureProbe::new(g.clone(), q.a() * &g).unwrap();
        let cg = spc_scaling(&probe, SpcScaling::Cg).unwrap();
        let mr = spc_scaling(&probe, SpcScaling::Mr).unwrap();
        let gm = spc_scaling(&probe, SpcScaling::Gm).unwrap();
        prop_assert!(mr <= gm * (1.0 + 1e-14) && gm <= cg * (1.0 + 1e-14));
        prop_assert!((gm * gm - mr * cg).abs() <= 1e-12 * mr * cg);
    }

    #[test]
    fn direction_is_collinear_with_gradient(g in vec_strategy(4), h in vec_strategy(4)) {
        let g = Vector::from_vec(g);
        prop_assume!(g.norm() > 1e-6);
        let probe = CurvatureProbe::new(g.clone(), Vector::from_vec(h)).unwrap();
        let cfg = ScalingConfig::default();
        let d = select_scaling(&probe, &cfg, &mut AlternationState::for_rule(cfg.spc_rule)).unwrap();
        prop_assert_eq!(d.p, &g * (-d.s));
        prop_assert!(d.s > 0.0);
    }

    #[test]
    fn quartic_curvature_map(t in -3.0f64..3.0) {
        let x = Vector::from_element(1, t);
        prop_assume!(t != 0.0 && (3.0 * t * t - 1.0_f64).abs() > 1e-9);
        let g = Quartic1D.gradient(&x);
        prop_assume!(g[0] != 0.0);
        let probe = CurvatureProbe::new(g.clone(), Quartic1D.hvp(&x, &g).unwrap()).unwrap();
        let flag = classify_curvature(&probe, 1e-6);
        let expected = if t.abs() < 1.0 / 3f64.sqrt() { CurvatureFlag::Nc } else { CurvatureFlag::Spc };
        prop_assert_eq!(flag, expected);
    }
}

#[test]
fn quartic_curvature_grid() {
    for i in 0..1000 {
        let t = -2.0 + 4.0 * (i as f64 + 0.5) / 1000.0;
        let x = Vector::from_element(1, t);
        let g = Quartic1D.gradient(&x);
        if g[0] == 0.0 {
            continue;
        }
        let probe = CurvatureProbe::new(g.clone(), Quartic1D.hvp(&x, &g).unwrap()).unwrap();
        let curv = 3.0 * t * t - 1.0;
        let expected = if curv < 0.0 {
            CurvatureFlag::Nc
        } else if curv > 1e-6 {
            CurvatureFlag::Spc
        } else {
            CurvatureFlag::Lpc
        };
        assert_eq!(classify_curvature(&probe, 1e-6), expected, "t = {t}");
    }
}

#[test]
fn scaled_runs_are_deterministic() {
    let spec = SyntheticSpec { n: 200, d: 10, classes: 3, separation: 1.0, seed: 5, lambda: 1e-3 };
    let p = gen_synthetic_classification(&spec).unwrap();
    let x0 = Vector::zeros(p.dim());
    let run = RunConfig { max_units: 2000.0, ..Default::default() };
    for rule in SpcRule::ALL {
        let a = scaled_gd(&p, &x0, &ScalingConfig::new(1e-6, rule), &ArmijoParams::default(), &run).unwrap();
        let b = scaled_gd(&p, &x0, &ScalingConfig::new(1e-6, rule), &ArmijoParams::default(), &run).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn quadratic_minimizer_is_recovered() {
    for seed in 0..10 {
        let d = 5 + 5 * (seed as usize % 10);
        let q = QuadraticProblem::random_spd(d, 0.5, 50.0, seed).unwrap();
        let xs = q.minimizer().unwrap().clone();
        for rule in SpcRule::ALL {
            let t = scaled_gd(&q, &Vector::zeros(d), &ScalingConfig::new(1e-6, rule), &ArmijoParams::default(), &RunConfig::default())
                .unwrap();
            assert!((&t.x_final - &xs).norm() <= 1e-3 * (1.0 + xs.norm()), "seed {seed} rule {rule}");
        }
    }
}

#[test]
fn logistic_is_midpoint_convex() {
    let spec = SyntheticSpec { n: 100, d: 4, classes: 3, separation: 1.0, seed: 2, lambda: 1e-3 };
    let p = gen_synthetic_classification(&spec).unwrap();
    let dim = p.dim();
    for i in 0..100u64 {
        let x = Vector::from_fn(dim, |j, _| ((i * 31 + j as u64 * 7) as f64).sin() * 3.0);
        let y = Vector::from_fn(dim, |j, _| ((i * 17 + j as u64 * 13) as f64).cos() * 3.0);
        let (fx, fy) = (p.value(&x), p.value(&y));
        let fm = p.value(&((&x + &y) * 0.5));
        assert!(fm <= 0.5 * (fx + fy) + 1e-12 * (1.0 + fx.abs() + fy.abs()));
    }
}

#[test]
fn subsampled_estimator_is_unbiased() {
    let s = QuadraticSum::synthetic(10, 4, 8);
    let x = Vector::from_element(4, 1.0);
    let v = Vector::from_column_slice(&[1.0, -1.0, 0.5, 2.0]);
    let exact = s.hvp(&x, &v).unwrap();
    let mut sampler = SubsampledHessian::new(&s, &SubsampleConfig::fixed(3, 21), &x).unwrap();
    let mut c = OracleCounter::new();
    let draws = 20_000;
    let mut mean = Vector::zeros(4);
    for _ in 0..draws {
        mean += sampler.subsampled_hvp(&x, &v, &mut c).unwrap();
    }
    mean /= draws as f64;
    assert!((mean - &exact).norm() <= 0.03 * exact.norm());
    assert!((c.units() - draws as f64 * 0.6).abs() < 1e-6);
}

#[test]
fn inexact_scaled_gd_converges_under_auto_batch() {
    let s = QuadraticSum::synthetic(10, 5, 3);
    let x0 = Vector::from_element(5, 2.0);
    let run = RunConfig { eps_g: 1e-6, ..Default::default() };
    let mut converged = 0;
    for seed in 0..100 {
        let cfg = SubsampleConfig::auto(0.1, 0.5 * s.mean().mu(), seed);
        let mut h = SubsampledHessian::new(&s, &cfg, &x0).unwrap();
        let gd = hscale::ScaledGd::new(ScalingConfig::new(1e-6, SpcRule::CgMr), ArmijoParams::default(), run);
        if let Ok(t) = gd.run_with(&s, &x0, &mut h, &mut |_| {}) {
            if t.status == hscale::RunStatus::Converged {
                converged += 1;
            }
        }
    }
    assert!(converged >= 95, "{converged}/100 converged");
}

#[test]
fn libsvm_file_round_trip() {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "1 1:0.5 2:-1.0\n3 2:2.0\n1\n3 1:1.5 2:0.25").unwrap();
    let p = hscale::problems::load_libsvm(f.path(), 1e-3).unwrap();
    assert_eq!(p.n_samples(), 4);
    assert_eq!(p.n_classes(), 2);
    assert_eq!(p.n_features(), 3);
    assert_eq!(p.labels(), &[0, 1, 0, 1]);
    let missing = hscale::problems::load_libsvm(std::path::Path::new("/nonexistent/file.svm"), 1e-3);
    assert!(matches!(missing, Err(hscale::Error::Io { .. })));
}
