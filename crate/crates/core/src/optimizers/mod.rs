//! Scaled gradient descent and the baseline optimizers, all emitting [`Trace`]s.
//!
//! Every trace ends with a terminal row describing the final iterate: its
//! `s`, `alpha` and `ls_trials` are zero and its flag is `None`. All other
//! rows describe an iterate together with the step taken from it.

mod baselines;
mod lsgd;
mod pono;
mod scaled;

use std::fmt;

use crate::error::{Error, Result};
use crate::oracle::{OracleCounter, Problem, Vector};
use crate::scaling::CurvatureFlag;

pub use baselines::{adam, fixed_gd, heavy_ball, nesterov, AdamParams};
pub use lsgd::{vanilla_ls_gd, ResetScheme};
pub use pono::{pono_ls, PonoParams};
pub use scaled::{scaled_gd, second_order_residual, unit_step_iterates, ScaledGd, StepView};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Stop once `||g|| < eps_g`.
    pub eps_g: f64,
    pub max_units: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Objective logging stride for the methods that do not evaluate `f` themselves.
    pub log_stride: usize,
    /// Curvature constant for the Wolfe diagnostic; `None` disables it.
    pub wolfe_eta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { eps_g: 1e-4, max_units: 1e5, max_iters: 1_000_000, seed: 0, log_stride: 1, wolfe_eta: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_g > 0.0 && self.eps_g.is_finite()) {
            return Err(Error::InvalidInput(format!("eps_g must be finite and > 0, got {}", self.eps_g)));
        }
        if !(self.max_units > 0.0) {
            return Err(Error::InvalidInput(format!("max_units must be > 0, got {}", self.max_units)));
        }
        if self.max_iters == 0 || self.log_stride == 0 {
            return Err(Error::InvalidInput("max_iters and log_stride must be >= 1".into()));
        }
        if let Some(eta) = self.wolfe_eta {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::InvalidInput(format!("wolfe_eta must lie in (0, 1), got {eta}")));
            }
        }
        Ok(())
    }

    fn out_of_budget(&self, counter: &OracleCounter, k: usize) -> bool {
        counter.units() >= self.max_units || k >= self.max_iters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    Diverged,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::Diverged => "diverged",
            RunStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub f: f64,
    pub gnorm: f64,
    /// Scaling used; zero for unscaled methods.
    pub s: f64,
    pub alpha: f64,
    pub flag: Option<CurvatureFlag>,
    pub ls_trials: usize,
    /// Cumulative units after this iteration's oracle calls.
    pub units: f64,
    pub wolfe: Option<bool>,
}

impl IterateRecord {
    fn terminal(k: usize, f: f64, gnorm: f64, units: f64) -> Self {
        Self { k, f, gnorm, s: 0.0, alpha: 0.0, flag: None, ls_trials: 0, units, wolfe: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub method: String,
    pub records: Vec<IterateRecord>,
    pub status: RunStatus,
    pub x_final: Vector,
    pub counter: OracleCounter,
    /// Iterations whose accepted value exceeded the previous one.
    pub nonmonotone_steps: usize,
}

impl Trace {
    fn new(method: &str, x: Vector) -> Self {
        Self {
            method: method.to_string(),
            records: Vec::new(),
            status: RunStatus::Failed,
            x_final: x,
            counter: OracleCounter::new(),
            nonmonotone_steps: 0,
        }
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    pub fn final_f(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.f)
    }

    pub fn final_gnorm(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.gnorm)
    }

    /// Index of the final iterate.
    pub fn iterations(&self) -> usize {
        self.last().map_or(0, |r| r.k)
    }

    /// Rows describing a step, i.e. all but the terminal row.
    pub fn steps(&self) -> &[IterateRecord] {
        match self.records.split_last() {
            Some((_, rest)) => rest,
            None => &[],
        }
    }

    /// Fraction of line-search steps that accepted `alpha = 1` on the first trial.
    pub fn unit_step_rate(&self) -> f64 {
        let ls: Vec<_> = self.steps().iter().filter(|r| r.ls_trials > 0).collect();
        if ls.is_empty() {
            return 0.0;
        }
        ls.iter().filter(|r| r.ls_trials == 1 && r.alpha == 1.0).count() as f64 / ls.len() as f64
    }

    /// `(SPC, LPC, NC)` counts over the step rows.
    pub fn flag_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in self.steps() {
            match r.flag {
                Some(CurvatureFlag::Spc) => c.0 += 1,
                Some(CurvatureFlag::Lpc) => c.1 += 1,
                Some(CurvatureFlag::Nc) => c.2 += 1,
                None => {}
            }
        }
        c
    }

    /// Mean of `ls_trials - 1` over line-search steps.
    pub fn mean_backtracks(&self) -> f64 {
        let ls: Vec<_> = self.steps().iter().filter(|r| r.ls_trials > 0).collect();
        if ls.is_empty() {
            return 0.0;
        }
        ls.iter().map(|r| (r.ls_trials - 1) as f64).sum::<f64>() / ls.len() as f64
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{method} failed after {iterations} iterations: {error}", method = trace.method, iterations = trace.iterations())]
pub struct RunError {
    pub error: Error,
    pub trace: Box<Trace>,
}

pub type RunResult = std::result::Result<Trace, RunError>;

/// `<g(x + alpha p), p> >= eta <g, p>`
pub fn wolfe_diagnostic(g_next: &Vector, p: &Vector, g: &Vector, eta: f64) -> bool {
    g_next.dot(p) >= eta * g.dot(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MomentumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("momentum alpha must be finite and > 0, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidInput(format!("momentum beta must lie in [0, 1), got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub heavy_ball: MomentumParams,
    pub nesterov: MomentumParams,
}

/// Standard tuning for `mu`-strongly convex, `L`-smooth objectives.
pub fn compute_theory_params(mu: f64, l: f64) -> Result<TheoryParams> {
    if !(mu > 0.0 && l >= mu && l.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    let (sl, sm) = (l.sqrt(), mu.sqrt());
    let hb_ratio = (sl - sm) / (sl + sm);
    let kappa = (l / mu).sqrt();
    Ok(TheoryParams {
        heavy_ball: MomentumParams { alpha: 4.0 / ((sl + sm) * (sl + sm)), beta: hb_ratio * hb_ratio },
        nesterov: MomentumParams { alpha: 1.0 / l, beta: (kappa - 1.0) / (kappa + 1.0) },
    })
}

fn check_start<P: Problem + ?Sized>(problem: &P, x0: &Vector, run: &RunConfig) -> Result<()> {
    run.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::InvalidInput(format!("x0 has length {} but the problem has dimension {}", x0.len(), problem.dim())));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("x0 has non-finite entries".into()));
    }
    Ok(())
}

fn fail(mut trace: Trace, counter: OracleCounter, x: Vector, error: Error) -> RunError {
    trace.status = RunStatus::Failed;
    trace.counter = counter;
    trace.x_final = x;
    RunError { error, trace: Box::new(trace) }
}
