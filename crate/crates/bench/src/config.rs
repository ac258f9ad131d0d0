//! Experiment configuration: TOML text parsed into raw sections, then
//! validated into an [`Experiment`] with the problem already built.
//!
//! Every validation error names the offending field, e.g. `method[2].alpha`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use hscale::inexact::{FiniteSum, SubsampleConfig};
use hscale::linesearch::ArmijoParams;
use hscale::optimizers::{compute_theory_params, AdamParams, MomentumParams, PonoParams, ResetScheme, RunConfig};
use hscale::problems::{
    gen_synthetic_classification, load_libsvm, LogisticProblem, QuadraticProblem, QuadraticSum, Quartic1D,
    Rosenbrock2D, SyntheticSpec,
};
use hscale::scaling::{ScalingConfig, SpcRule};
use hscale::{Problem, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::BenchError;

pub const OUT_DIR_ENV: &str = "HSCALE_OUT_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    method: Vec<RawMethod>,
    tune: Option<RawTune>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: String,
    n: Option<usize>,
    d: Option<usize>,
    classes: Option<usize>,
    separation: Option<f64>,
    seed: Option<u64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    l: Option<f64>,
    diag: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    path: Option<PathBuf>,
    components: Option<usize>,
    x0: Option<RawStart>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawStart {
    Point(Vec<f64>),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    eps_g: Option<f64>,
    max_units: Option<f64>,
    max_iters: Option<usize>,
    seeds: Option<Vec<u64>>,
    log_stride: Option<usize>,
    workers: Option<usize>,
    wolfe_eta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Tunable {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    id: String,
    label: Option<String>,
    rule: Option<String>,
    sigma: Option<f64>,
    strongly_convex: Option<bool>,
    hessian: Option<String>,
    batch: Option<usize>,
    delta: Option<f64>,
    delta_h: Option<f64>,
    reset: Option<String>,
    alpha: Option<Tunable>,
    beta: Option<Tunable>,
    lr: Option<f64>,
    f_star: Option<f64>,
    rho: Option<f64>,
    theta: Option<f64>,
    alpha0: Option<f64>,
    max_trials: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTune {
    method: String,
    grid: Vec<f64>,
}

/// A built test problem.
#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Quadratic(QuadraticProblem),
    QuadraticSum(QuadraticSum),
    Logistic(LogisticProblem),
    Quartic(Quartic1D),
    Rosenbrock(Rosenbrock2D),
}

impl ProblemInstance {
    pub fn as_problem(&self) -> &dyn Problem {
        match self {
            ProblemInstance::Quadratic(p) => p,
            ProblemInstance::QuadraticSum(p) => p,
            ProblemInstance::Logistic(p) => p,
            ProblemInstance::Quartic(p) => p,
            ProblemInstance::Rosenbrock(p) => p,
        }
    }

    pub fn as_finite_sum(&self) -> Option<&dyn FiniteSum> {
        match self {
            ProblemInstance::QuadraticSum(p) => Some(p),
            ProblemInstance::Logistic(p) => Some(p),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemInstance::Quadratic(_) => "quadratic",
            ProblemInstance::QuadraticSum(_) => "quadratic-sum",
            ProblemInstance::Logistic(_) => "logistic",
            ProblemInstance::Quartic(_) => "quartic1d",
            ProblemInstance::Rosenbrock(_) => "rosenbrock2d",
        }
    }

    /// Conventional starting point for the problem family.
    pub fn default_start(&self) -> Vector {
        match self {
            ProblemInstance::Quartic(_) => Vector::from_element(1, 0.5),
            ProblemInstance::Rosenbrock(_) => Rosenbrock2D::standard_start(),
            other => Vector::zeros(other.as_problem().dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartPoint {
    Default,
    Point(Vector),
    /// Uniform in `[-1, 1]^d`, drawn from the run seed.
    Random,
}

impl StartPoint {
    pub fn resolve(&self, problem: &ProblemInstance, seed: u64) -> Vector {
        match self {
            StartPoint::Default => problem.default_start(),
            StartPoint::Point(x) => x.clone(),
            StartPoint::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Vector::from_fn(problem.as_problem().dim(), |_, _| rng.random_range(-1.0..=1.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HessianMode {
    Exact,
    Subsampled { batch: Option<usize>, delta: f64, delta_h: f64 },
}

impl HessianMode {
    pub fn subsample_config(&self, seed: u64) -> Option<SubsampleConfig> {
        match *self {
            HessianMode::Exact => None,
            HessianMode::Subsampled { batch: Some(b), .. } => Some(SubsampleConfig::fixed(b, seed)),
            HessianMode::Subsampled { batch: None, delta, delta_h } => Some(SubsampleConfig::auto(delta, delta_h, seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Scaled { scaling: ScalingConfig, armijo: ArmijoParams, hessian: HessianMode },
    LineSearch { reset: ResetScheme, armijo: ArmijoParams },
    Fixed { alpha: f64 },
    HeavyBall(MomentumParams),
    Nesterov(MomentumParams),
    Adam(AdamParams),
    Pono(PonoParams),
}

impl Method {
    /// Replaces the step-size hyperparameter; `None` if the method has none.
    pub fn with_step(&self, value: f64) -> Option<Method> {
        let mut m = self.clone();
        match &mut m {
            Method::Fixed { alpha } => *alpha = value,
            Method::HeavyBall(p) | Method::Nesterov(p) => p.alpha = value,
            Method::Adam(p) => p.lr = value,
            Method::LineSearch { armijo, .. } => armijo.alpha0 = value,
            Method::Scaled { .. } | Method::Pono(_) => return None,
        }
        Some(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodEntry {
    pub label: String,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpec {
    pub method: String,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: ProblemInstance,
    pub start: StartPoint,
    pub methods: Vec<MethodEntry>,
    /// Shared run settings; `seed` is overwritten per run.
    pub run: RunConfig,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub tune: Option<TuneSpec>,
}

fn cfg_err(path: impl Into<String>, message: impl Into<String>) -> BenchError {
    BenchError::Config { path: path.into(), message: message.into() }
}

impl Experiment {
    /// Reads and validates a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, BenchError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| cfg_err("<toml>", e.to_string()))?;
        let problem = build_problem(&raw.problem, base_dir)?;
        let start = build_start(&raw.problem, &problem)?;
        let run = build_run(&raw.run)?;
        let seeds = raw.run.seeds.clone().unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(cfg_err("run.seeds", "at least one seed is required"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(cfg_err("run.seeds", format!("seed {dup} is listed twice")));
        }
        let workers = raw.run.workers.unwrap_or(1);
        if workers == 0 {
            return Err(cfg_err("run.workers", "must be >= 1"));
        }
        if raw.method.is_empty() {
            return Err(cfg_err("method", "the method list is empty"));
        }
        let mut methods = Vec::with_capacity(raw.method.len());
        let mut labels = HashSet::new();
        for (i, m) in raw.method.iter().enumerate() {
            let entry = build_method(m, i, &problem)?;
            if !labels.insert(entry.label.clone()) {
                return Err(cfg_err(format!("method[{i}].label"), format!("duplicate label `{}`", entry.label)));
            }
            methods.push(entry);
        }
        let tune = match &raw.tune {
            None => None,
            Some(t) => {
                let Some(entry) = methods.iter().find(|m| m.label == t.method) else {
                    return Err(cfg_err("tune.method", format!("no method labelled `{}`", t.method)));
                };
                if entry.method.with_step(1.0).is_none() {
                    return Err(cfg_err("tune.method", format!("method `{}` has no step size to tune", t.method)));
                }
                if t.grid.is_empty() {
                    return Err(cfg_err("tune.grid", "grid must be nonempty"));
                }
                if let Some(bad) = t.grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(cfg_err("tune.grid", format!("grid values must be finite and > 0, got {bad}")));
                }
                Some(TuneSpec { method: t.method.clone(), grid: t.grid.clone() })
            }
        };
        let output_dir = match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => {
                let dir = raw.output.dir.clone().unwrap_or_else(|| PathBuf::from("hscale-out"));
                if dir.is_relative() {
                    base_dir.join(dir)
                } else {
                    dir
                }
            }
        };
        Ok(Self { problem, start, methods, run, seeds, workers, output_dir, tune })
    }
}

fn require<T: Copy>(v: Option<T>, path: &str) -> Result<T, BenchError> {
    v.ok_or_else(|| cfg_err(path, "required for this problem kind"))
}

fn build_problem(raw: &RawProblem, base_dir: &Path) -> Result<ProblemInstance, BenchError> {
    let lambda = raw.lambda.unwrap_or(hscale::problems::data::DEFAULT_LAMBDA);
    let seed = raw.seed.unwrap_or(0);
    let wrap = |e: hscale::Error| cfg_err("problem", e.to_string());
    let unused = |fields: &[(&str, bool)]| -> Result<(), BenchError> {
        match fields.iter().find(|(_, present)| *present) {
            Some((name, _)) => Err(cfg_err(format!("problem.{name}"), format!("not used by kind `{}`", raw.kind))),
            None => Ok(()),
        }
    };
    match raw.kind.as_str() {
        "quadratic" => {
            unused(&[("path", raw.path.is_some()), ("classes", raw.classes.is_some()), ("components", raw.components.is_some())])?;
            if let Some(diag) = &raw.diag {
                let b = raw.b.clone().unwrap_or_else(|| vec![0.0; diag.len()]);
                if b.len() != diag.len() {
                    return Err(cfg_err("problem.b", format!("length {} does not match diag length {}", b.len(), diag.len())));
                }
                QuadraticProblem::diagonal(diag, &b).map(ProblemInstance::Quadratic).map_err(wrap)
            } else {
                let d = require(raw.d, "problem.d")?;
                let mu = require(raw.mu, "problem.mu")?;
                let l = require(raw.l, "problem.l")?;
                QuadraticProblem::random_spd(d, mu, l, seed).map(ProblemInstance::Quadratic).map_err(wrap)
            }
        }
        "quadratic-sum" => {
            let n = require(raw.components.or(raw.n), "problem.components")?;
            let d = require(raw.d, "problem.d")?;
            if n == 0 || d == 0 {
                return Err(cfg_err("problem.components", "components and d must be >= 1"));
            }
            Ok(ProblemInstance::QuadraticSum(QuadraticSum::synthetic(n, d, seed)))
        }
        "logistic-synthetic" => {
            let defaults = SyntheticSpec::default();
            let spec = SyntheticSpec {
                n: raw.n.unwrap_or(defaults.n),
                d: raw.d.unwrap_or(defaults.d),
                classes: raw.classes.unwrap_or(defaults.classes),
                separation: raw.separation.unwrap_or(defaults.separation),
                seed,
                lambda,
            };
            gen_synthetic_classification(&spec).map(ProblemInstance::Logistic).map_err(wrap)
        }
        "logistic-libsvm" => {
            let path = raw.path.clone().ok_or_else(|| cfg_err("problem.path", "required for kind `logistic-libsvm`"))?;
            let path = if path.is_relative() { base_dir.join(path) } else { path };
            load_libsvm(&path, lambda).map(ProblemInstance::Logistic).map_err(|e| cfg_err("problem.path", e.to_string()))
        }
        "quartic1d" => Ok(ProblemInstance::Quartic(Quartic1D)),
        "rosenbrock2d" => Ok(ProblemInstance::Rosenbrock(Rosenbrock2D)),
        other => Err(cfg_err(
            "problem.kind",
            format!(
                "unknown kind `{other}`; expected quadratic, quadratic-sum, logistic-synthetic, logistic-libsvm, quartic1d or rosenbrock2d"
            ),
        )),
    }
}

fn build_start(raw: &RawProblem, problem: &ProblemInstance) -> Result<StartPoint, BenchError> {
    match &raw.x0 {
        None => Ok(StartPoint::Default),
        Some(RawStart::Keyword(k)) if k == "random" => Ok(StartPoint::Random),
        Some(RawStart::Keyword(k)) if k == "default" => Ok(StartPoint::Default),
        Some(RawStart::Keyword(k)) => Err(cfg_err("problem.x0", format!("expected a list, `default` or `random`, got `{k}`"))),
        Some(RawStart::Point(xs)) => {
            let d = problem.as_problem().dim();
            if xs.len() != d {
                return Err(cfg_err("problem.x0", format!("length {} does not match dimension {d}", xs.len())));
            }
            if !xs.iter().all(|v| v.is_finite()) {
                return Err(cfg_err("problem.x0", "entries must be finite"));
            }
            Ok(StartPoint::Point(Vector::from_column_slice(xs)))
        }
    }
}

fn build_run(raw: &RawRun) -> Result<RunConfig, BenchError> {
    let defaults = RunConfig::default();
    let run = RunConfig {
        eps_g: raw.eps_g.unwrap_or(defaults.eps_g),
        max_units: raw.max_units.unwrap_or(defaults.max_units),
        max_iters: raw.max_iters.unwrap_or(defaults.max_iters),
        seed: 0,
        log_stride: raw.log_stride.unwrap_or(defaults.log_stride),
        wolfe_eta: raw.wolfe_eta,
    };
    let field = |name: &str| format!("run.{name}");
    if !(run.eps_g > 0.0 && run.eps_g.is_finite()) {
        return Err(cfg_err(field("eps_g"), "must be finite and > 0"));
    }
    if !(run.max_units > 0.0) {
        return Err(cfg_err(field("max_units"), "must be > 0"));
    }
    if run.max_iters == 0 {
        return Err(cfg_err(field("max_iters"), "must be >= 1"));
    }
    if run.log_stride == 0 {
        return Err(cfg_err(field("log_stride"), "must be >= 1"));
    }
    if let Some(eta) = run.wolfe_eta {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(cfg_err(field("wolfe_eta"), "must lie in (0, 1)"));
        }
    }
    Ok(run)
}

fn build_method(raw: &RawMethod, i: usize, problem: &ProblemInstance) -> Result<MethodEntry, BenchError> {
    let at = |name: &str| format!("method[{i}].{name}");
    let present: [(&str, bool); 16] = [
        ("rule", raw.rule.is_some()),
        ("sigma", raw.sigma.is_some()),
        ("strongly_convex", raw.strongly_convex.is_some()),
        ("hessian", raw.hessian.is_some()),
        ("batch", raw.batch.is_some()),
        ("delta", raw.delta.is_some()),
        ("delta_h", raw.delta_h.is_some()),
        ("reset", raw.reset.is_some()),
        ("alpha", raw.alpha.is_some()),
        ("beta", raw.beta.is_some()),
        ("lr", raw.lr.is_some()),
        ("f_star", raw.f_star.is_some()),
        ("rho", raw.rho.is_some()),
        ("theta", raw.theta.is_some()),
        ("alpha0", raw.alpha0.is_some()),
        ("max_trials", raw.max_trials.is_some()),
    ];
    let allowed: &[&str] = match raw.id.as_str() {
        "scaled" => &["rule", "sigma", "strongly_convex", "hessian", "batch", "delta", "delta_h", "rho", "theta", "max_trials"],
        "linesearch" => &["reset", "rho", "theta", "alpha0", "max_trials"],
        "fixed" => &["alpha"],
        "heavy-ball" | "nesterov" => &["alpha", "beta"],
        "adam" => &["lr"],
        "pono" => &["f_star", "theta", "max_trials"],
        other => {
            return Err(cfg_err(
                at("id"),
                format!("unknown method `{other}`; expected scaled, linesearch, fixed, heavy-ball, nesterov, adam or pono"),
            ))
        }
    };
    if let Some((name, _)) = present.iter().find(|(name, p)| *p && !allowed.contains(name)) {
        return Err(cfg_err(at(name), format!("not used by method `{}`", raw.id)));
    }

    let armijo = || -> Result<ArmijoParams, BenchError> {
        let d = ArmijoParams::default();
        let a = ArmijoParams {
            rho: raw.rho.unwrap_or(d.rho),
            theta: raw.theta.unwrap_or(d.theta),
            alpha0: raw.alpha0.unwrap_or(d.alpha0),
            max_trials: raw.max_trials.unwrap_or(d.max_trials),
        };
        a.validate().map_err(|e| cfg_err(format!("method[{i}]"), e.to_string()))?;
        Ok(a)
    };
    let theory = || {
        let est = problem.as_problem().curvature_estimates().ok_or_else(|| {
            cfg_err(at("alpha"), format!("`theory` needs curvature estimates, which `{}` does not provide", problem.name()))
        })?;
        compute_theory_params(est.mu, est.l).map_err(|e| cfg_err(at("alpha"), e.to_string()))
    };
    let tunable = |v: &Option<Tunable>, name: &str, theory_value: &dyn Fn() -> Result<f64, BenchError>| {
        match v {
            None => Err(cfg_err(at(name), "required")),
            Some(Tunable::Value(x)) => Ok(*x),
            Some(Tunable::Keyword(k)) if k == "theory" => theory_value(),
            Some(Tunable::Keyword(k)) => Err(cfg_err(at(name), format!("expected a number or `theory`, got `{k}`"))),
        }
    };

    let (default_label, method) = match raw.id.as_str() {
        "scaled" => {
            let rule: SpcRule = match &raw.rule {
                Some(r) => r.parse().map_err(|e: hscale::Error| cfg_err(at("rule"), e.to_string()))?,
                None => SpcRule::CgMr,
            };
            let scaling = if raw.strongly_convex.unwrap_or(false) {
                if raw.sigma.is_some_and(|s| s != 0.0) {
                    return Err(cfg_err(at("sigma"), "strongly convex mode fixes sigma = 0"));
                }
                ScalingConfig::strongly_convex(rule)
            } else {
                ScalingConfig::new(raw.sigma.unwrap_or(ScalingConfig::DEFAULT_SIGMA), rule)
            };
            scaling.validate().map_err(|e| cfg_err(at("sigma"), e.to_string()))?;
            let hessian = match raw.hessian.as_deref().unwrap_or("exact") {
                "exact" => {
                    if let Some((name, _)) =
                        [("batch", raw.batch.is_some()), ("delta", raw.delta.is_some()), ("delta_h", raw.delta_h.is_some())]
                            .iter()
                            .find(|(_, p)| *p)
                    {
                        return Err(cfg_err(at(name), "only used with hessian = \"subsampled\""));
                    }
                    HessianMode::Exact
                }
                "subsampled" => {
                    if problem.as_finite_sum().is_none() {
                        return Err(cfg_err(at("hessian"), format!("`{}` is not a finite sum", problem.name())));
                    }
                    let mode = HessianMode::Subsampled {
                        batch: raw.batch,
                        delta: raw.delta.unwrap_or(0.1),
                        delta_h: raw.delta_h.unwrap_or(0.5),
                    };
                    mode.subsample_config(0)
                        .expect("subsampled")
                        .validate()
                        .map_err(|e| cfg_err(at("hessian"), e.to_string()))?;
                    mode
                }
                other => return Err(cfg_err(at("hessian"), format!("expected `exact` or `subsampled`, got `{other}`"))),
            };
            let a = armijo()?;
            if a.alpha0 != 1.0 {
                return Err(cfg_err(at("alpha0"), "scaled methods always start at alpha = 1"));
            }
            (rule.as_str().to_string(), Method::Scaled { scaling, armijo: a, hessian })
        }
        "linesearch" => {
            let reset: ResetScheme = match &raw.reset {
                Some(r) => r.parse().map_err(|e: hscale::Error| cfg_err(at("reset"), e.to_string()))?,
                None => ResetScheme::LimitedReset,
            };
            (format!("gd-{reset}"), Method::LineSearch { reset, armijo: armijo()? })
        }
        "fixed" => {
            let alpha = tunable(&raw.alpha, "alpha", &|| Ok(theory()?.nesterov.alpha))?;
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(cfg_err(at("alpha"), "must be finite and >= 0"));
            }
            ("fixed".to_string(), Method::Fixed { alpha })
        }
        id @ ("heavy-ball" | "nesterov") => {
            let hb = id == "heavy-ball";
            let pick = |t: hscale::optimizers::TheoryParams| if hb { t.heavy_ball } else { t.nesterov };
            let params = MomentumParams {
                alpha: tunable(&raw.alpha, "alpha", &|| Ok(pick(theory()?).alpha))?,
                beta: tunable(&raw.beta, "beta", &|| Ok(pick(theory()?).beta))?,
            };
            params.validate().map_err(|e| cfg_err(format!("method[{i}]"), e.to_string()))?;
            (id.to_string(), if hb { Method::HeavyBall(params) } else { Method::Nesterov(params) })
        }
        "adam" => {
            let params = AdamParams::new(raw.lr.ok_or_else(|| cfg_err(at("lr"), "required"))?);
            params.validate().map_err(|e| cfg_err(at("lr"), e.to_string()))?;
            ("adam".to_string(), Method::Adam(params))
        }
        "pono" => {
            let d = PonoParams::default();
            let params = PonoParams {
                f_star: raw.f_star.unwrap_or(d.f_star),
                theta: raw.theta.unwrap_or(d.theta),
                max_trials: raw.max_trials.unwrap_or(d.max_trials),
                ..d
            };
            params.validate().map_err(|e| cfg_err(format!("method[{i}]"), e.to_string()))?;
            ("pono".to_string(), Method::Pono(params))
        }
        _ => unreachable!("ids validated above"),
    };
    let label = raw.label.clone().unwrap_or(default_label);
    if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        return Err(cfg_err(at("label"), format!("`{label}` must be nonempty and use only [A-Za-z0-9._-]")));
    }
    Ok(MethodEntry { label, method })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Experiment, BenchError> {
        Experiment::parse(text, Path::new("/tmp"))
    }

    fn err_path(text: &str) -> String {
        match parse(text).unwrap_err() {
            BenchError::Config { path, .. } => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    const PROBLEM: &str = "[problem]\nkind = \"quadratic\"\ndiag = [1.0, 4.0]\n";

    #[test]
    fn minimal_config() {
        let e = parse(&format!("{PROBLEM}[[method]]\nid = \"scaled\"\n")).unwrap();
        assert_eq!(e.methods[0].label, "CGMR");
        assert_eq!(e.seeds, vec![0]);
        assert_eq!(e.run.max_units, 1e5);
    }

    #[test]
    fn theory_parameters_resolve() {
        let e = parse(&format!(
            "{PROBLEM}[[method]]\nid = \"heavy-ball\"\nalpha = \"theory\"\nbeta = \"theory\"\n[[method]]\nid = \"fixed\"\nalpha = \"theory\"\n"
        ))
        .unwrap();
        assert_eq!(e.methods[0].method, Method::HeavyBall(MomentumParams { alpha: 4.0 / 9.0, beta: (1.0f64 / 3.0).powi(2) }));
        assert_eq!(e.methods[1].method, Method::Fixed { alpha: 0.25 });
    }

    #[test]
    fn empty_method_list_is_rejected() {
        assert_eq!(err_path(PROBLEM), "method");
    }

    #[test]
    fn errors_name_fields() {
        assert_eq!(err_path(&format!("{PROBLEM}[[method]]\nid = \"fixed\"\nalpha = \"fast\"\n")), "method[0].alpha");
        assert_eq!(err_path(&format!("{PROBLEM}[[method]]\nid = \"adam\"\nlr = 0.1\nbeta = 0.5\n")), "method[0].beta");
        assert_eq!(err_path(&format!("{PROBLEM}[[method]]\nid = \"newton\"\n")), "method[0].id");
        assert_eq!(err_path(&format!("{PROBLEM}[run]\neps_g = -1.0\n[[method]]\nid = \"scaled\"\n")), "run.eps_g");
        assert_eq!(
            err_path("[problem]\nkind = \"rosenbrock2d\"\n[[method]]\nid = \"nesterov\"\nalpha = \"theory\"\nbeta = 0.5\n"),
            "method[0].alpha"
        );
        assert_eq!(
            err_path(&format!("{PROBLEM}[[method]]\nid = \"scaled\"\n[[method]]\nid = \"scaled\"\n")),
            "method[1].label"
        );
        assert_eq!(err_path(&format!("{PROBLEM}[[method]]\nid = \"scaled\"\n[tune]\nmethod = \"CGMR\"\ngrid = [1.0]\n")), "tune.method");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert_eq!(err_path(&format!("{PROBLEM}[run]\nepsg = 1e-3\n[[method]]\nid = \"scaled\"\n")), "<toml>");
    }
}
