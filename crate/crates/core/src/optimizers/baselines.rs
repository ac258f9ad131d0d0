//! Methods without a globalization safeguard: fixed-step GD, momentum and Adam.
//!
//! These never evaluate `f` for their own use, so the objective is billed only
//! at logged iterations (every `log_stride`-th and the terminal one). Fifty
//! consecutive logged increases, or non-finite iterates, end the run as
//! [`RunStatus::Diverged`].

use crate::error::{Error, Result};
use crate::oracle::{eval_gradient, eval_value, OracleCounter, Problem, Vector};
use crate::optimizers::{check_start, fail, IterateRecord, MomentumParams, RunConfig, RunResult, RunStatus, Trace};

const DIVERGENCE_STREAK: usize = 50;

/// One update rule: given `k`, `x_k` and `g_k`, return `x_{k+1}`.
trait Stepper {
    fn step(&mut self, k: usize, x: &Vector, g: &Vector) -> Vector;
}

fn run_unguarded<P: Problem + ?Sized>(
    method: &str,
    problem: &P,
    x0: &Vector,
    run: &RunConfig,
    step_size: f64,
    stepper: &mut dyn Stepper,
) -> RunResult {
    let mut trace = Trace::new(method, x0.clone());
    if let Err(e) = check_start(problem, x0, run) {
        return Err(fail(trace, OracleCounter::new(), x0.clone(), e));
    }
    let mut counter = OracleCounter::new();
    let mut x = x0.clone();
    let mut prev_f: Option<f64> = None;
    let mut streak = 0;
    let mut k = 0;

    let finish = |mut trace: Trace, counter: OracleCounter, x: Vector, status: RunStatus| {
        trace.status = status;
        trace.counter = counter;
        trace.x_final = x;
        trace
    };

    loop {
        let g = match eval_gradient(problem, &x, &mut counter) {
            Ok(g) => g,
            Err(Error::NumericalFailure { .. }) => return Ok(finish(trace, counter, x, RunStatus::Diverged)),
            Err(e) => return Err(fail(trace, counter, x, e)),
        };
        let gnorm = g.norm();
        let status = if gnorm < run.eps_g {
            Some(RunStatus::Converged)
        } else if run.out_of_budget(&counter, k) {
            Some(RunStatus::BudgetExhausted)
        } else {
            None
        };
        let logged = status.is_some() || k % run.log_stride == 0;
        if logged {
            let f = match eval_value(problem, &x, &mut counter) {
                Ok(f) => f,
                Err(Error::NumericalFailure { .. }) => return Ok(finish(trace, counter, x, RunStatus::Diverged)),
                Err(e) => return Err(fail(trace, counter, x, e)),
            };
            if let Some(status) = status {
                trace.records.push(IterateRecord::terminal(k, f, gnorm, counter.units()));
                return Ok(finish(trace, counter, x, status));
            }
            streak = match prev_f {
                Some(p) if f > p => streak + 1,
                _ => 0,
            };
            prev_f = Some(f);
            trace.records.push(IterateRecord {
                k,
                f,
                gnorm,
                s: 0.0,
                alpha: step_size,
                flag: None,
                ls_trials: 0,
                units: counter.units(),
                wolfe: None,
            });
            if streak >= DIVERGENCE_STREAK {
                return Ok(finish(trace, counter, x, RunStatus::Diverged));
            }
        }
        let next = stepper.step(k, &x, &g);
        if !next.iter().all(|v| v.is_finite()) {
            return Ok(finish(trace, counter, x, RunStatus::Diverged));
        }
        x = next;
        k += 1;
    }
}

struct Fixed(f64);

impl Stepper for Fixed {
    fn step(&mut self, _k: usize, x: &Vector, g: &Vector) -> Vector {
        x - g * self.0
    }
}

/// `x+ = x - alpha g`
pub fn fixed_gd<P: Problem + ?Sized>(problem: &P, x0: &Vector, alpha: f64, run: &RunConfig) -> RunResult {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        let e = Error::InvalidInput(format!("step size must be finite and >= 0, got {alpha}"));
        return Err(fail(Trace::new("fixed", x0.clone()), OracleCounter::new(), x0.clone(), e));
    }
    run_unguarded("fixed", problem, x0, run, alpha, &mut Fixed(alpha))
}

struct Momentum {
    params: MomentumParams,
    v: Vector,
    nesterov: bool,
}

impl Stepper for Momentum {
    fn step(&mut self, _k: usize, x: &Vector, g: &Vector) -> Vector {
        let MomentumParams { alpha, beta } = self.params;
        self.v = &self.v * beta - g * alpha;
        if self.nesterov {
            x - g * alpha + &self.v * beta
        } else {
            x + &self.v
        }
    }
}

fn momentum<P: Problem + ?Sized>(
    method: &str,
    nesterov: bool,
    problem: &P,
    x0: &Vector,
    params: MomentumParams,
    run: &RunConfig,
) -> RunResult {
    if let Err(e) = params.validate() {
        return Err(fail(Trace::new(method, x0.clone()), OracleCounter::new(), x0.clone(), e));
    }
    let mut stepper = Momentum { params, v: Vector::zeros(x0.len()), nesterov };
    run_unguarded(method, problem, x0, run, params.alpha, &mut stepper)
}

/// `v+ = beta v - alpha g`, `x+ = x + v+`
pub fn heavy_ball<P: Problem + ?Sized>(problem: &P, x0: &Vector, params: MomentumParams, run: &RunConfig) -> RunResult {
    momentum("heavy-ball", false, problem, x0, params, run)
}

/// `v+ = beta v - alpha g`, `x+ = x - alpha g + beta v+`
pub fn nesterov<P: Problem + ?Sized>(problem: &P, x0: &Vector, params: MomentumParams, run: &RunConfig) -> RunResult {
    momentum("nesterov", true, problem, x0, params, run)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamParams {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidInput(format!("learning rate must be finite and > 0, got {}", self.lr)));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.eps > 0.0) {
            return Err(Error::InvalidInput("Adam needs beta1, beta2 in [0, 1) and eps > 0".into()));
        }
        Ok(())
    }
}

struct Adam {
    params: AdamParams,
    m: Vector,
    v: Vector,
}

impl Stepper for Adam {
    fn step(&mut self, k: usize, x: &Vector, g: &Vector) -> Vector {
        let AdamParams { lr, beta1, beta2, eps } = self.params;
        let t = (k + 1) as i32;
        self.m = &self.m * beta1 + g * (1.0 - beta1);
        self.v = &self.v * beta2 + g.component_mul(g) * (1.0 - beta2);
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let mut next = x.clone();
        for i in 0..x.len() {
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            next[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
        next
    }
}

/// Adam with bias correction on full gradients.
pub fn adam<P: Problem + ?Sized>(problem: &P, x0: &Vector, params: AdamParams, run: &RunConfig) -> RunResult {
    if let Err(e) = params.validate() {
        return Err(fail(Trace::new("adam", x0.clone()), OracleCounter::new(), x0.clone(), e));
    }
    let d = x0.len();
    run_unguarded("adam", problem, x0, run, params.lr, &mut Adam { params, m: Vector::zeros(d), v: Vector::zeros(d) })
}
