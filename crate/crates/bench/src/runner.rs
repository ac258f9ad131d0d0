//! Method dispatch, the experiment matrix, summaries and grid tuning.

use std::path::{Path, PathBuf};

use hscale::inexact::SubsampledHessian;
use hscale::optimizers::{
    adam, fixed_gd, heavy_ball, nesterov, pono_ls, vanilla_ls_gd, RunConfig, RunResult, RunStatus, ScaledGd, Trace,
};
use hscale::Vector;
use rayon::prelude::*;

use crate::config::{Experiment, Method, MethodEntry, ProblemInstance};
use crate::error::BenchError;
use crate::trace_io::{emit_trace, format_real};

/// Runs one method from `x0`; `run.seed` feeds any stochastic component.
pub fn run_method(problem: &ProblemInstance, method: &Method, x0: &Vector, run: &RunConfig) -> RunResult {
    let p = problem.as_problem();
    match method {
        Method::Scaled { scaling, armijo, hessian } => {
            let gd = ScaledGd::new(*scaling, *armijo, *run);
            match (hessian.subsample_config(run.seed), problem.as_finite_sum()) {
                (Some(cfg), Some(fs)) => match SubsampledHessian::new(fs, &cfg, x0) {
                    Ok(mut h) => gd.run_with(p, x0, &mut h, &mut |_| {}),
                    Err(error) => Err(hscale::RunError {
                        error,
                        trace: Box::new(Trace {
                            method: scaling.spc_rule.as_str().to_string(),
                            records: Vec::new(),
                            status: RunStatus::Failed,
                            x_final: x0.clone(),
                            counter: Default::default(),
                            nonmonotone_steps: 0,
                        }),
                    }),
                },
                _ => gd.run(p, x0),
            }
        }
        Method::LineSearch { reset, armijo } => vanilla_ls_gd(p, x0, *reset, armijo, run),
        Method::Fixed { alpha } => fixed_gd(p, x0, *alpha, run),
        Method::HeavyBall(params) => heavy_ball(p, x0, *params, run),
        Method::Nesterov(params) => nesterov(p, x0, *params, run),
        Method::Adam(params) => adam(p, x0, *params, run),
        Method::Pono(params) => pono_ls(p, x0, params, run),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub seed: u64,
    pub final_f: f64,
    pub final_gnorm: f64,
    pub iterations: usize,
    pub units: f64,
    pub status: RunStatus,
    pub unit_step_rate: f64,
    pub spc: usize,
    pub lpc: usize,
    pub nc: usize,
    /// Mean of `ls_trials - 1` over line-search iterations.
    pub backtracks: f64,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 12] = [
        "method",
        "seed",
        "status",
        "final_f",
        "final_gnorm",
        "iterations",
        "units",
        "unit_step_rate",
        "spc",
        "lpc",
        "nc",
        "backtracks",
    ];

    pub fn from_trace(method: &str, seed: u64, trace: &Trace) -> Self {
        let (spc, lpc, nc) = trace.flag_counts();
        Self {
            method: method.to_string(),
            seed,
            final_f: trace.final_f(),
            final_gnorm: trace.final_gnorm(),
            iterations: trace.iterations(),
            units: trace.last().map_or(trace.counter.units(), |r| r.units),
            status: trace.status,
            unit_step_rate: trace.unit_step_rate(),
            spc,
            lpc,
            nc,
            backtracks: trace.mean_backtracks(),
        }
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.seed.to_string(),
            self.status.to_string(),
            format_real(self.final_f),
            format_real(self.final_gnorm),
            self.iterations.to_string(),
            format_real(self.units),
            format_real(self.unit_step_rate),
            self.spc.to_string(),
            self.lpc.to_string(),
            self.nc.to_string(),
            format_real(self.backtracks),
        ]
    }
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<(), BenchError> {
    let io = |e: &dyn std::fmt::Display| BenchError::Io { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
    w.write_record(SummaryRow::HEADER).map_err(|e| io(&e))?;
    for r in rows {
        w.write_record(r.to_record()).map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub seed: u64,
    pub trace: Trace,
    pub error: Option<String>,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunOutcome> {
        self.runs.iter().filter(|r| r.error.is_some())
    }
}

pub fn trace_file_name(label: &str, seed: u64) -> String {
    format!("{label}_seed{seed}.csv")
}

fn run_one(exp: &Experiment, entry: &MethodEntry, seed: u64) -> (Trace, Option<String>) {
    let x0 = exp.start.resolve(&exp.problem, seed);
    let run = RunConfig { seed, ..exp.run };
    match run_method(&exp.problem, &entry.method, &x0, &run) {
        Ok(t) => (t, None),
        Err(e) => (*e.trace.clone(), Some(e.error.to_string())),
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config { path: "run.workers".into(), message: e.to_string() })
}

/// Runs every (method, seed) pair and writes one trace per run plus `summary.csv`.
///
/// Output is identical for any worker count: runs share nothing mutable and
/// results are collected in matrix order before the summary is written.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport, BenchError> {
    std::fs::create_dir_all(&exp.output_dir)
        .map_err(|e| BenchError::Io { path: exp.output_dir.clone(), message: e.to_string() })?;
    let jobs: Vec<(&MethodEntry, u64)> =
        exp.methods.iter().flat_map(|m| exp.seeds.iter().map(move |&s| (m, s))).collect();
    let pool = thread_pool(exp.workers)?;
    let results: Vec<Result<RunOutcome, BenchError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(entry, seed)| {
                let (trace, error) = run_one(exp, entry, seed);
                let path = exp.output_dir.join(trace_file_name(&entry.label, seed));
                emit_trace(&trace.records, &path)?;
                Ok(RunOutcome { label: entry.label.clone(), seed, trace, error, path })
            })
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary: Vec<SummaryRow> = runs.iter().map(|r| SummaryRow::from_trace(&r.label, r.seed, &r.trace)).collect();
    let summary_path = exp.output_dir.join("summary.csv");
    write_summary(&summary, &summary_path)?;
    Ok(ExperimentReport { runs, summary, summary_path })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunePoint {
    pub value: f64,
    pub status: RunStatus,
    pub final_f: f64,
    pub units: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneReport {
    pub method: String,
    pub points: Vec<TunePoint>,
    pub best: f64,
    pub best_f: f64,
    /// Units spent across the whole grid.
    pub total_units: f64,
}

/// Runs each grid value of the method's step size on the first seed and keeps
/// the smallest final objective among runs that neither diverged nor failed.
pub fn tune_grid(exp: &Experiment, label: &str, grid: &[f64]) -> Result<TuneReport, BenchError> {
    let entry = exp
        .methods
        .iter()
        .find(|m| m.label == label)
        .ok_or_else(|| BenchError::Config { path: "tune.method".into(), message: format!("no method labelled `{label}`") })?;
    if grid.is_empty() {
        return Err(BenchError::Config { path: "tune.grid".into(), message: "grid must be nonempty".into() });
    }
    let seed = exp.seeds[0];
    let pool = thread_pool(exp.workers)?;
    let points: Vec<TunePoint> = pool.install(|| {
        grid.par_iter()
            .map(|&value| {
                let method = entry.method.with_step(value).expect("validated tunable method");
                let tuned = MethodEntry { label: entry.label.clone(), method };
                let (trace, _) = run_one(exp, &tuned, seed);
                TunePoint {
                    value,
                    status: trace.status,
                    final_f: trace.final_f(),
                    units: trace.counter.units(),
                }
            })
            .collect()
    });
    let total_units = points.iter().map(|p| p.units).sum();
    let best = points
        .iter()
        .filter(|p| !matches!(p.status, RunStatus::Diverged | RunStatus::Failed) && p.final_f.is_finite())
        .fold(None::<&TunePoint>, |acc, p| match acc {
            Some(b) if b.final_f <= p.final_f => Some(b),
            _ => Some(p),
        })
        .ok_or_else(|| BenchError::TuningFailed { method: label.to_string() })?;
    Ok(TuneReport { method: label.to_string(), best: best.value, best_f: best.final_f, points: points.clone(), total_units })
}

pub fn write_tune_report(report: &TuneReport, path: &Path) -> Result<(), BenchError> {
    let io = |e: &dyn std::fmt::Display| BenchError::Io { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
    w.write_record(["value", "status", "final_f", "units", "selected"]).map_err(|e| io(&e))?;
    for p in &report.points {
        w.write_record([
            format_real(p.value),
            p.status.to_string(),
            format_real(p.final_f),
            format_real(p.units),
            (p.value == report.best).to_string(),
        ])
        .map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}
