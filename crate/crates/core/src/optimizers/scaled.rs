use crate::error::{Error, Result};
use crate::linesearch::{backtrack, forward_track, ArmijoParams, LineSearchOutcome};
use crate::oracle::{eval_gradient, eval_value, ExactHessian, HessianProduct, OracleCounter, Problem, Vector};
use crate::optimizers::{check_start, fail, wolfe_diagnostic, IterateRecord, RunConfig, RunResult, RunStatus, Trace};
use crate::scaling::{
    select_scaling, spc_scaling, AlternationState, CurvatureFlag, CurvatureProbe, ScalingConfig, ScalingDecision,
    SpcRule,
};

/// Tolerance on the second-order descent residual, relative to `||g|| ||p||`.
const SECOND_ORDER_TOL: f64 = 1e-10;

/// Everything the driver knew when it took step `k`, handed to observers.
#[derive(Debug)]
pub struct StepView<'a> {
    pub k: usize,
    pub x: &'a Vector,
    pub f: f64,
    pub probe: &'a CurvatureProbe,
    pub decision: &'a ScalingDecision,
    pub outcome: &'a LineSearchOutcome,
}

/// `<g, p> + s^2 <g, Hg>`, nonpositive for every valid decision.
pub fn second_order_residual(probe: &CurvatureProbe, decision: &ScalingDecision) -> f64 {
    probe.g().dot(&decision.p) + decision.s * decision.s * probe.g_hg()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaledGd {
    pub scaling: ScalingConfig,
    pub armijo: ArmijoParams,
    pub run: RunConfig,
}

impl ScaledGd {
    pub fn new(scaling: ScalingConfig, armijo: ArmijoParams, run: RunConfig) -> Self {
        Self { scaling, armijo, run }
    }

    pub fn validate(&self) -> Result<()> {
        self.scaling.validate()?;
        self.armijo.validate()?;
        if self.armijo.alpha0 != 1.0 {
            return Err(Error::InvalidInput(format!(
                "scaled gradient descent starts every line search at alpha = 1, got {}",
                self.armijo.alpha0
            )));
        }
        self.run.validate()
    }

    pub fn run<P: Problem + ?Sized>(&self, problem: &P, x0: &Vector) -> RunResult {
        self.run_with(problem, x0, &mut ExactHessian(problem), &mut |_| {})
    }

    /// Runs with a caller-supplied curvature source and a per-step observer.
    pub fn run_with<P: Problem + ?Sized, H: HessianProduct>(
        &self,
        problem: &P,
        x0: &Vector,
        hessian: &mut H,
        observer: &mut dyn FnMut(&StepView<'_>),
    ) -> RunResult {
        let mut trace = Trace::new(self.scaling.spc_rule.as_str(), x0.clone());
        if let Err(e) = self.validate().and_then(|_| check_start(problem, x0, &self.run)) {
            return Err(fail(trace, OracleCounter::new(), x0.clone(), e));
        }
        let mut counter = OracleCounter::new();
        let mut x = x0.clone();
        let mut state = AlternationState::for_rule(self.scaling.spc_rule);
        // (g_k, p_k) of the previous step, for the Wolfe diagnostic.
        let mut last_step: Option<(Vector, Vector)> = None;

        macro_rules! tryrun {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(err) => return Err(fail(trace, counter, x, err)),
                }
            };
        }

        let mut f = tryrun!(eval_value(problem, &x, &mut counter));
        let mut k = 0;
        loop {
            let g = tryrun!(eval_gradient(problem, &x, &mut counter));
            if let (Some(eta), Some((g_prev, p_prev))) = (self.run.wolfe_eta, last_step.take()) {
                if let Some(r) = trace.records.last_mut() {
                    r.wolfe = Some(wolfe_diagnostic(&g, &p_prev, &g_prev, eta));
                }
            }
            let gnorm = g.norm();
            let status = if gnorm < self.run.eps_g {
                Some(RunStatus::Converged)
            } else if self.run.out_of_budget(&counter, k) {
                Some(RunStatus::BudgetExhausted)
            } else {
                None
            };
            if let Some(status) = status {
                trace.records.push(IterateRecord::terminal(k, f, gnorm, counter.units()));
                trace.status = status;
                trace.counter = counter;
                trace.x_final = x;
                return Ok(trace);
            }

            let hg = tryrun!(hessian.product(&x, &g, &mut counter));
            let probe = tryrun!(CurvatureProbe::new(g, hg));
            let decision = tryrun!(select_scaling(&probe, &self.scaling, &mut state));
            let pnorm = decision.p.norm();
            let residual = second_order_residual(&probe, &decision);
            let dirderiv = -decision.s * probe.gnorm2();
            if !(residual <= SECOND_ORDER_TOL * gnorm * pnorm && dirderiv < 0.0) {
                tryrun!(Err(Error::ContractViolation(format!(
                    "second-order descent failed at k = {k}: residual {residual:e}, <g,p> = {dirderiv:e}"
                ))));
            }

            let outcome = match decision.flag {
                CurvatureFlag::Spc | CurvatureFlag::Lpc => {
                    backtrack(problem, &x, &decision.p, f, dirderiv, &self.armijo, &mut counter)
                }
                CurvatureFlag::Nc => forward_track(problem, &x, &decision.p, f, dirderiv, &self.armijo, &mut counter),
            };
            let outcome = tryrun!(outcome);
            observer(&StepView { k, x: &x, f, probe: &probe, decision: &decision, outcome: &outcome });

            trace.records.push(IterateRecord {
                k,
                f,
                gnorm,
                s: decision.s,
                alpha: outcome.alpha,
                flag: Some(decision.flag),
                ls_trials: outcome.trials,
                units: counter.units(),
                wolfe: None,
            });
            x.axpy(outcome.alpha, &decision.p, 1.0);
            f = outcome.f_alpha;
            if self.run.wolfe_eta.is_some() {
                let ScalingDecision { p, .. } = decision;
                last_step = Some((probe.g().clone(), p));
            }
            k += 1;
        }
    }
}

/// Scaled gradient descent with exact Hessian-vector products.
pub fn scaled_gd<P: Problem + ?Sized>(
    problem: &P,
    x0: &Vector,
    scaling: &ScalingConfig,
    armijo: &ArmijoParams,
    run: &RunConfig,
) -> RunResult {
    ScaledGd::new(*scaling, *armijo, *run).run(problem, x0)
}

/// Iterates of `x+ = x - s(x) g(x)` with unit steps, for an SPC-only rule.
///
/// Stops early if the gradient vanishes exactly. No line search and no billing.
pub fn unit_step_iterates<P: Problem + ?Sized>(
    problem: &P,
    x0: &Vector,
    rule: SpcRule,
    iterations: usize,
) -> Result<Vec<Vector>> {
    let mut state = AlternationState::for_rule(rule);
    let config = ScalingConfig::strongly_convex(rule);
    let mut xs = vec![x0.clone()];
    let mut counter = OracleCounter::new();
    let mut hessian = ExactHessian(problem);
    for _ in 0..iterations {
        let x = xs.last().expect("seeded with x0");
        let g = eval_gradient(problem, x, &mut counter)?;
        if g.iter().all(|&v| v == 0.0) {
            break;
        }
        let hg = hessian.product(x, &g, &mut counter)?;
        let probe = CurvatureProbe::new(g, hg)?;
        let decision = select_scaling(&probe, &config, &mut state)?;
        debug_assert_eq!(decision.s, spc_scaling(&probe, decision.rule_used.expect("SPC"))?);
        xs.push(x + decision.p);
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{QuadraticProblem, Quartic1D};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn first_cg_step_on_diag_quadratic() {
        let q = QuadraticProblem::diagonal(&[1.0, 4.0], &[0.0, 0.0]).unwrap();
        let gd = ScaledGd::new(ScalingConfig::strongly_convex(SpcRule::Cg), ArmijoParams::default(), RunConfig::default());
        let mut first = None;
        gd.run_with(&q, &v(&[1.0, 1.0]), &mut ExactHessian(&q), &mut |s| {
            if s.k == 0 {
                first = Some((s.decision.p.clone(), s.outcome.alpha));
            }
        })
        .unwrap();
        let (p, alpha) = first.unwrap();
        let expected = v(&[1.0, 4.0]) * (-17.0 / 65.0);
        assert!((p - expected).norm() < 1e-15);
        assert_eq!(alpha, 1.0);
    }

    #[test]
    fn one_dimensional_quadratic_is_newton() {
        let q = QuadraticProblem::diagonal(&[3.0], &[6.0]).unwrap();
        for rule in SpcRule::ALL {
            let t = scaled_gd(&q, &v(&[10.0]), &ScalingConfig::strongly_convex(rule), &ArmijoParams::default(), &RunConfig::default())
                .unwrap();
            assert_eq!(t.status, RunStatus::Converged);
            assert_eq!(t.iterations(), 1, "{rule}");
            assert!((t.x_final[0] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_step_iteration_costs_four_units() {
        let q = QuadraticProblem::diagonal(&[3.0], &[6.0]).unwrap();
        let t = scaled_gd(&q, &v(&[10.0]), &ScalingConfig::default(), &ArmijoParams::default(), &RunConfig::default())
            .unwrap();
        // f0 (1) + [g (1) + hvp (2) + one trial (1)] + final g (1)
        assert_eq!(t.records[0].units, 5.0);
        assert_eq!(t.counter.units(), 6.0);
        assert_eq!(t.records.len(), 2);
    }

    #[test]
    fn quartic_from_nc_region() {
        let t = scaled_gd(&Quartic1D, &v(&[0.5]), &ScalingConfig::default(), &ArmijoParams::default(), &RunConfig::default())
            .unwrap();
        assert_eq!(t.records[0].flag, Some(CurvatureFlag::Nc));
        assert!(t.records[0].alpha > 1.0);
        assert_eq!(t.status, RunStatus::Converged);
        assert!(t.final_gnorm() <= 1e-4);
        assert!((t.x_final[0].abs() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn strongly_convex_declaration_is_enforced() {
        let err = scaled_gd(
            &Quartic1D,
            &v(&[0.5]),
            &ScalingConfig::strongly_convex(SpcRule::Cg),
            &ArmijoParams::default(),
            &RunConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err.error, Error::ContractViolation(_)));
        assert_eq!(err.trace.status, RunStatus::Failed);
    }

    #[test]
    fn alpha0_must_be_one() {
        let gd = ScaledGd { armijo: ArmijoParams::default().with_alpha0(2.0), ..Default::default() };
        assert!(gd.run(&Quartic1D, &v(&[0.5])).is_err());
    }

    #[test]
    fn wolfe_flags_are_recorded() {
        let q = QuadraticProblem::diagonal(&[1.0, 4.0], &[0.0, 0.0]).unwrap();
        let run = RunConfig { wolfe_eta: Some(0.9), ..Default::default() };
        let t = scaled_gd(&q, &v(&[1.0, 1.0]), &ScalingConfig::default(), &ArmijoParams::default(), &run).unwrap();
        assert!(t.steps().iter().all(|r| r.wolfe.is_some()));
        assert!(t.last().unwrap().wolfe.is_none());
    }
}
