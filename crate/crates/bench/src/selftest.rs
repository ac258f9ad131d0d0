//! Fast invariant suites behind `hscale selftest` and the oracle checks behind `hscale check`.

use hscale::linesearch::{backtrack, ArmijoParams};
use hscale::optimizers::{scaled_gd, RunConfig, RunStatus};
use hscale::oracle::OracleCounter;
use hscale::problems::{grad_check, hvp_check, CheckReport, QuadraticProblem, Quartic1D, Rosenbrock2D};
use hscale::scaling::{spc_scaling, CurvatureProbe, ScalingConfig, SpcRule, SpcScaling};
use hscale::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ProblemInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn scaling_ordering() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut ordered = true;
    for i in 0..200 {
        let d = rng.random_range(1..=10);
        let q = QuadraticProblem::random_spd(d, 0.01, 100.0, i).expect("valid spectrum");
        let g = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let probe = CurvatureProbe::new(g.clone(), q.a() * &g).expect("nonzero gradient");
        let s = |r| spc_scaling(&probe, r).expect("SPC");
        let (cg, mr, gm) = (s(SpcScaling::Cg), s(SpcScaling::Mr), s(SpcScaling::Gm));
        ordered &= mr <= gm * (1.0 + 1e-14) && gm <= cg * (1.0 + 1e-14);
        worst = worst.max((gm * gm - mr * cg).abs() / (mr * cg));
    }
    SuiteResult { name: "scaling ordering", passed: ordered && worst <= 1e-12, detail: format!("max GM^2 mismatch {worst:.2e}") }
}

fn unit_steps() -> SuiteResult {
    let mut extra = 0;
    for seed in 0..5 {
        let q = QuadraticProblem::random_spd(10, 0.5, 20.0, seed).expect("valid spectrum");
        for rule in SpcRule::ALL {
            let t = scaled_gd(&q, &Vector::zeros(10), &ScalingConfig::new(1e-6, rule), &ArmijoParams::default(), &RunConfig::default());
            extra += t.map_or(1, |t| t.steps().iter().filter(|r| r.ls_trials != 1).count());
        }
    }
    SuiteResult { name: "unit step on quadratics", passed: extra == 0, detail: format!("{extra} iterations backtracked") }
}

fn backtrack_oracle() -> SuiteResult {
    let q = QuadraticProblem::diagonal(&[1.0], &[0.0]).expect("valid");
    let x = Vector::from_element(1, 1.0);
    let mut mismatches = 0;
    for m in 1..=40 {
        let scale = m as f64 * 0.25;
        let p = Vector::from_element(1, -scale);
        let mut c = OracleCounter::new();
        let params = ArmijoParams::default();
        let got = backtrack(&q, &x, &p, 0.5, -scale, &params, &mut c).map(|o| o.alpha).ok();
        let want = (0..params.max_trials).map(|j| params.theta.powi(j as i32)).find(|&a| {
            let xt = 1.0 - a * scale;
            0.5 * xt * xt <= 0.5 - params.rho * a * scale
        });
        mismatches += usize::from(got != want);
    }
    SuiteResult { name: "backtracking vs scan", passed: mismatches == 0, detail: format!("{mismatches} mismatches") }
}

fn nonconvex() -> SuiteResult {
    let q = scaled_gd(&Quartic1D, &Vector::from_element(1, 0.5), &ScalingConfig::default(), &ArmijoParams::default(), &RunConfig::default());
    let r = scaled_gd(&Rosenbrock2D, &Rosenbrock2D::standard_start(), &ScalingConfig::default(), &ArmijoParams::default(), &RunConfig::default());
    let ok = |t: &Result<hscale::Trace, hscale::RunError>| t.as_ref().is_ok_and(|t| t.status == RunStatus::Converged);
    SuiteResult { name: "nonconvex convergence", passed: ok(&q) && ok(&r), detail: "quartic and Rosenbrock".into() }
}

pub fn run_selftest() -> Vec<SuiteResult> {
    vec![scaling_ordering(), unit_steps(), backtrack_oracle(), nonconvex()]
}

/// Gradient and HVP checks at the default start and two deterministic perturbations.
pub fn check_problem(problem: &ProblemInstance, tol: f64) -> Vec<(String, CheckReport)> {
    let p = problem.as_problem();
    let base = problem.default_start();
    let d = base.len();
    let mut out = Vec::new();
    for (j, shift) in [0.0, 0.3, -0.7].into_iter().enumerate() {
        let x = &base + Vector::from_fn(d, |i, _| shift * ((i + 1) as f64).sin());
        let v = Vector::from_fn(d, |i, _| ((i + 2) as f64).cos());
        out.push((format!("gradient at point {j}"), grad_check(p, &x, tol)));
        out.push((format!("hvp at point {j}"), hvp_check(p, &x, &v, tol)));
    }
    out
}
