use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linesearch::{backtrack, ArmijoParams};
use crate::oracle::{eval_gradient, eval_value, OracleCounter, Problem, Vector};
use crate::optimizers::{check_start, fail, IterateRecord, RunConfig, RunResult, RunStatus, Trace};

/// How each backtracking search is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResetScheme {
    /// Start from the previous accepted step.
    NoReset,
    /// Start from `alpha0` every time.
    FullReset,
    /// Start from the previous accepted step divided by `theta`.
    LimitedReset,
}

impl ResetScheme {
    pub const ALL: [ResetScheme; 3] = [ResetScheme::NoReset, ResetScheme::FullReset, ResetScheme::LimitedReset];

    pub fn as_str(self) -> &'static str {
        match self {
            ResetScheme::NoReset => "no-reset",
            ResetScheme::FullReset => "full-reset",
            ResetScheme::LimitedReset => "limited-reset",
        }
    }

    /// Initial trial step given the previous accepted step (`alpha0` before the first iteration).
    pub fn initial_step(self, previous: f64, params: &ArmijoParams) -> f64 {
        match self {
            ResetScheme::NoReset => previous,
            ResetScheme::FullReset => params.alpha0,
            ResetScheme::LimitedReset => previous / params.theta,
        }
    }
}

impl fmt::Display for ResetScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResetScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "no-reset" | "noreset" | "none" => Ok(ResetScheme::NoReset),
            "full-reset" | "fullreset" | "full" => Ok(ResetScheme::FullReset),
            "limited-reset" | "limitedreset" | "limited" => Ok(ResetScheme::LimitedReset),
            other => Err(Error::InvalidInput(format!("unknown reset scheme `{other}`"))),
        }
    }
}

/// Gradient descent `p = -g` with Armijo backtracking.
pub fn vanilla_ls_gd<P: Problem + ?Sized>(
    problem: &P,
    x0: &Vector,
    scheme: ResetScheme,
    armijo: &ArmijoParams,
    run: &RunConfig,
) -> RunResult {
    let method = format!("gd-{scheme}");
    let mut trace = Trace::new(&method, x0.clone());
    if let Err(e) = armijo.validate().and_then(|_| check_start(problem, x0, run)) {
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
    let mut previous = armijo.alpha0;
    let mut k = 0;
    loop {
        let g = tryrun!(eval_gradient(problem, &x, &mut counter));
        let gnorm = g.norm();
        let status = if gnorm < run.eps_g {
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
        let params = armijo.with_alpha0(scheme.initial_step(previous, armijo));
        let p = -&g;
        let outcome = tryrun!(backtrack(problem, &x, &p, f, -gnorm * gnorm, &params, &mut counter));
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
        x.axpy(outcome.alpha, &p, 1.0);
        f = outcome.f_alpha;
        previous = outcome.alpha;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;

    #[test]
    fn limited_reset_example() {
        let params = ArmijoParams::default();
        assert_eq!(ResetScheme::LimitedReset.initial_step(0.25, &params), 0.5);
        assert_eq!(ResetScheme::LimitedReset.initial_step(1.0, &params), 2.0);
        assert_eq!(ResetScheme::NoReset.initial_step(0.25, &params), 0.25);
        assert_eq!(ResetScheme::FullReset.initial_step(0.25, &params), 1.0);
    }

    #[test]
    fn no_reset_steps_are_monotone() {
        let q = QuadraticProblem::random_spd(8, 0.1, 30.0, 2).unwrap();
        let t = vanilla_ls_gd(&q, &Vector::from_element(8, 3.0), ResetScheme::NoReset, &ArmijoParams::default(), &RunConfig::default())
            .unwrap();
        let steps = t.steps();
        assert!(steps.windows(2).all(|w| w[1].alpha <= w[0].alpha));
    }

    #[test]
    fn full_reset_on_unit_quadratic_converges_in_one_step() {
        let q = QuadraticProblem::diagonal(&[1.0], &[0.0]).unwrap();
        let t = vanilla_ls_gd(&q, &Vector::from_element(1, 1.0), ResetScheme::FullReset, &ArmijoParams::default(), &RunConfig::default())
            .unwrap();
        assert_eq!(t.iterations(), 1);
        assert_eq!(t.records[0].alpha, 1.0);
        assert_eq!(t.status, RunStatus::Converged);
    }

    #[test]
    fn scheme_parsing() {
        for s in ResetScheme::ALL {
            assert_eq!(s.as_str().parse::<ResetScheme>().unwrap(), s);
        }
        assert!("sometimes".parse::<ResetScheme>().is_err());
    }
}
