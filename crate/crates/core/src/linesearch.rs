//! Armijo sufficient decrease with backward and forward/backward tracking.

use crate::error::{Error, Result};
use crate::oracle::{OracleCounter, Problem, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoParams {
    /// Sufficient-decrease constant; `0 <= rho < 1/2`.
    pub rho: f64,
    /// Shrink factor; growth uses `1/theta`.
    pub theta: f64,
    pub alpha0: f64,
    pub max_trials: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self { rho: 1e-4, theta: 0.5, alpha0: 1.0, max_trials: 60 }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.rho) {
            return Err(Error::InvalidInput(format!("rho must lie in [0, 1/2), got {}", self.rho)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidInput(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha0 must be finite and > 0, got {}", self.alpha0)));
        }
        if self.max_trials == 0 {
            return Err(Error::InvalidInput("max_trials must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_alpha0(self, alpha0: f64) -> Self {
        Self { alpha0, ..self }
    }
}

/// One Armijo evaluation: the step tried and `f(x + alpha p)` there.
///
/// Non-finite trial values are stored as `+inf` and always fail the test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trial {
    pub alpha: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    /// `f(x + alpha p)`, threaded back so the next iterate's value is not recomputed.
    pub f_alpha: f64,
    pub trials: usize,
    /// `alpha == alpha0` was accepted on the first trial.
    pub accepted_first: bool,
    /// Forward tracking hit `max_trials` while Armijo still held.
    pub growth_capped: bool,
    pub history: Vec<Trial>,
}

/// `f_trial <= f0 + rho * alpha * dirderiv`
pub fn armijo_holds(f0: f64, f_trial: f64, alpha: f64, dirderiv: f64, rho: f64) -> bool {
    f_trial <= f0 + rho * alpha * dirderiv
}

fn evaluate<P: Problem + ?Sized>(problem: &P, x: &Vector, p: &Vector, alpha: f64, counter: &mut OracleCounter) -> Trial {
    counter.f_evals += 1;
    let xt = x + p * alpha;
    let value = if xt.iter().all(|e| e.is_finite()) { problem.value(&xt) } else { f64::INFINITY };
    Trial { alpha, value: if value.is_finite() { value } else { f64::INFINITY } }
}

fn check_pre(dirderiv: f64, f0: f64) -> Result<()> {
    if !(dirderiv < 0.0) {
        return Err(Error::ContractViolation(format!(
            "line search needs a descent direction, got <p,g> = {dirderiv:e}"
        )));
    }
    if !f0.is_finite() {
        return Err(Error::InvalidInput(format!("line search started from non-finite f0 = {f0}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn continue_backtracking<P: Problem + ?Sized>(
    problem: &P,
    x: &Vector,
    p: &Vector,
    f0: f64,
    dirderiv: f64,
    params: &ArmijoParams,
    counter: &mut OracleCounter,
    mut history: Vec<Trial>,
) -> Result<LineSearchOutcome> {
    loop {
        let last = *history.last().expect("history seeded with the first trial");
        if armijo_holds(f0, last.value, last.alpha, dirderiv, params.rho) {
            return Ok(LineSearchOutcome {
                alpha: last.alpha,
                f_alpha: last.value,
                trials: history.len(),
                accepted_first: history.len() == 1,
                growth_capped: false,
                history,
            });
        }
        if history.len() >= params.max_trials {
            return Err(Error::LineSearchStall {
                alpha: last.alpha,
                f0,
                f_last: last.value,
                trials: history.len(),
            });
        }
        history.push(evaluate(problem, x, p, params.theta * last.alpha, counter));
    }
}

/// First `alpha` in `alpha0, theta alpha0, theta^2 alpha0, ...` satisfying Armijo.
///
/// `f0 = f(x)` is assumed already paid for; each trial bills one function
/// evaluation.
pub fn backtrack<P: Problem + ?Sized>(
    problem: &P,
    x: &Vector,
    p: &Vector,
    f0: f64,
    dirderiv: f64,
    params: &ArmijoParams,
    counter: &mut OracleCounter,
) -> Result<LineSearchOutcome> {
    check_pre(dirderiv, f0)?;
    let first = evaluate(problem, x, p, params.alpha0, counter);
    continue_backtracking(problem, x, p, f0, dirderiv, params, counter, vec![first])
}

/// Grow `alpha` by `1/theta` while Armijo holds; backtrack if `alpha0` fails.
///
/// On growth the returned step is the last passing trial, so `alpha / theta`
/// was tried and failed. The failing trial is still billed. If growth runs
/// into `max_trials` the last passing step is returned with `growth_capped`.
pub fn forward_track<P: Problem + ?Sized>(
    problem: &P,
    x: &Vector,
    p: &Vector,
    f0: f64,
    dirderiv: f64,
    params: &ArmijoParams,
    counter: &mut OracleCounter,
) -> Result<LineSearchOutcome> {
    check_pre(dirderiv, f0)?;
    let first = evaluate(problem, x, p, params.alpha0, counter);
    if !armijo_holds(f0, first.value, first.alpha, dirderiv, params.rho) {
        // Reuse the failed alpha0 trial instead of re-testing it.
        return continue_backtracking(problem, x, p, f0, dirderiv, params, counter, vec![first]);
    }
    let mut history = vec![first];
    let mut passing = first;
    let mut capped = false;
    loop {
        if history.len() >= params.max_trials {
            capped = true;
            break;
        }
        let next = evaluate(problem, x, p, passing.alpha / params.theta, counter);
        history.push(next);
        if armijo_holds(f0, next.value, next.alpha, dirderiv, params.rho) {
            passing = next;
        } else {
            break;
        }
    }
    Ok(LineSearchOutcome {
        alpha: passing.alpha,
        f_alpha: passing.value,
        trials: history.len(),
        accepted_first: false,
        growth_capped: capped,
        history,
    })
}
