//! Polyak initial step with a Zhang-Hager nonmonotone Armijo test.

use crate::error::{Error, Result};
use crate::linesearch::{backtrack, ArmijoParams};
use crate::oracle::{eval_gradient, eval_value, OracleCounter, Problem, Vector};
use crate::optimizers::{check_start, fail, IterateRecord, RunConfig, RunResult, RunStatus, Trace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PonoParams {
    /// Lower bound on `f`.
    pub f_star: f64,
    /// Sufficient-decrease constant of the nonmonotone test.
    pub c_armijo: f64,
    /// Initial step `(f - f*) / (c_polyak ||g||^2)`.
    pub c_polyak: f64,
    pub alpha_max: f64,
    pub theta: f64,
    /// Averaging weight of the reference value; 0 recovers monotone Armijo.
    pub eta: f64,
    pub max_trials: usize,
}

impl Default for PonoParams {
    fn default() -> Self {
        Self { f_star: 0.0, c_armijo: 0.5, c_polyak: 0.5, alpha_max: 10.0, theta: 0.5, eta: 0.85, max_trials: 60 }
    }
}

impl PonoParams {
    pub fn validate(&self) -> Result<()> {
        if !self.f_star.is_finite() {
            return Err(Error::InvalidInput(format!("f_star must be finite, got {}", self.f_star)));
        }
        if !(self.c_armijo > 0.0 && self.c_armijo < 1.0) {
            return Err(Error::InvalidInput(format!("c_armijo must lie in (0, 1), got {}", self.c_armijo)));
        }
        if !(self.c_polyak > 0.0 && self.c_polyak.is_finite() && self.alpha_max > 0.0) {
            return Err(Error::InvalidInput("c_polyak and alpha_max must be > 0".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) || !(0.0..1.0).contains(&self.eta) || self.max_trials == 0 {
            return Err(Error::InvalidInput("need theta in (0, 1), eta in [0, 1) and max_trials >= 1".into()));
        }
        Ok(())
    }

    /// `min(alpha_max, (f - f*) / (c_polyak ||g||^2))`
    pub fn polyak_step(&self, f: f64, gnorm2: f64) -> f64 {
        ((f - self.f_star) / (self.c_polyak * gnorm2)).min(self.alpha_max)
    }
}

pub fn pono_ls<P: Problem + ?Sized>(problem: &P, x0: &Vector, params: &PonoParams, run: &RunConfig) -> RunResult {
    let mut trace = Trace::new("pono", x0.clone());
    if let Err(e) = params.validate().and_then(|_| check_start(problem, x0, run)) {
        return Err(fail(trace, OracleCounter::new(), x0.clone(), e));
    }
    let mut counter = OracleCounter::new();
    let mut x = x0.clone();

    macro_rules! tryrun {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => return Err(fail(trace, counter, x, err)),
            }
        };
    }

    let mut f = tryrun!(eval_value(problem, &x, &mut counter));
    // Zhang-Hager reference value C_k and weight Q_k.
    let mut c_ref = f;
    let mut q = 1.0;
    let mut k = 0;
    loop {
        let g = tryrun!(eval_gradient(problem, &x, &mut counter));
        let gnorm = g.norm();
        let gnorm2 = gnorm * gnorm;
        let status = if gnorm < run.eps_g || gnorm2 < f64::MIN_POSITIVE {
            Some(RunStatus::Converged)
        } else if run.out_of_budget(&counter, k) {
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
        if f <= params.f_star {
            tryrun!(Err(Error::ContractViolation(format!(
                "f = {f:e} at or below the supplied lower bound {:e} with ||g|| = {gnorm:e}",
                params.f_star
            ))));
        }
        let ls = ArmijoParams {
            rho: params.c_armijo,
            theta: params.theta,
            alpha0: params.polyak_step(f, gnorm2),
            max_trials: params.max_trials,
        };
        let p = -&g;
        let outcome = tryrun!(backtrack(problem, &x, &p, c_ref, -gnorm2, &ls, &mut counter));
        trace.records.push(IterateRecord {
            k,
            f,
            gnorm,
            s: 0.0,
            alpha: outcome.alpha,
            flag: None,
            ls_trials: outcome.trials,
            units: counter.units(),
            wolfe: None,
        });
        if outcome.f_alpha > f {
            trace.nonmonotone_steps += 1;
        }
        x.axpy(outcome.alpha, &p, 1.0);
        f = outcome.f_alpha;
        let q_next = params.eta * q + 1.0;
        c_ref = (params.eta * q * c_ref + f) / q_next;
        q = q_next;
        k += 1;
    }
}
