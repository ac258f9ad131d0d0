//! Finite-sum objectives with subsampled Hessian-vector products.
//!
//! For `f = (1/n) sum_i f_i`, the Hessian is estimated from a minibatch drawn
//! uniformly with replacement. The batch size needed for
//! `||(H~ - H) g|| <= Delta_H ||g||` with probability `1 - delta` is
//! `L1max^2 (1 + sqrt(8 ln(1/delta)))^2 / Delta_H^2`, where `L1max` bounds
//! `||H_i g|| / ||g||` uniformly over components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{ensure_finite, HessianProduct, OracleCounter, Problem, Vector};

/// `f(x) = (1/n) sum_i f_i(x)` with per-component oracles.
pub trait FiniteSum: Problem {
    fn n_components(&self) -> usize;

    fn component_value(&self, i: usize, x: &Vector) -> f64;

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector;

    fn component_hvp(&self, i: usize, x: &Vector, v: &Vector) -> Vector;

    /// Known uniform bound on `||H_i(x) g|| / ||g||`, if any.
    fn l1max(&self) -> Option<f64> {
        None
    }
}

/// Minimum batch size for the subsampled Hessian to be within `delta_h` with probability `1 - delta`.
pub fn sample_size(l1max: f64, delta: f64, delta_h: f64) -> usize {
    assert!(l1max > 0.0 && delta_h > 0.0, "sample_size needs positive L1max and Delta_H");
    assert!(delta > 0.0 && delta < 1.0, "sample_size needs delta in (0, 1)");
    sample_size_real(l1max, delta, delta_h).ceil() as usize
}

/// The same bound before rounding up.
pub fn sample_size_real(l1max: f64, delta: f64, delta_h: f64) -> f64 {
    let log_term = (1.0 + (8.0 * (1.0 / delta).ln()).sqrt()).powi(2);
    l1max * l1max * log_term / (delta_h * delta_h)
}

/// `|<g, Hg - H~g>| <= Delta_H ||g||^2`
pub fn hessian_error_check(g: &Vector, hg_exact: &Vector, hg_tilde: &Vector, delta_h: f64) -> bool {
    assert_eq!(g.len(), hg_exact.len());
    assert_eq!(g.len(), hg_tilde.len());
    g.dot(&(hg_exact - hg_tilde)).abs() <= delta_h * g.dot(g)
}

/// Largest `||H_i g|| / ||g||` over components at `x`, with `g = grad f(x)`.
pub fn estimate_l1max<F: FiniteSum + ?Sized>(problem: &F, x: &Vector) -> Result<f64> {
    let g = problem.gradient(x);
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return Err(Error::InvalidInput("cannot estimate L1max at a stationary point".into()));
    }
    let best = (0..problem.n_components())
        .map(|i| problem.component_hvp(i, x, &g).norm() / gnorm)
        .fold(0.0, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchSize {
    Fixed(usize),
    /// Resolve from [`sample_size`].
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    WithReplacement,
    /// Every component exactly once per product; for testing the estimator.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleConfig {
    pub delta: f64,
    pub delta_h: f64,
    pub batch: BatchSize,
    /// Overrides the problem's bound; `None` falls back to the problem, then to an estimate at `x0`.
    pub l1max: Option<f64>,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl SubsampleConfig {
    pub fn auto(delta: f64, delta_h: f64, seed: u64) -> Self {
        Self { delta, delta_h, batch: BatchSize::Auto, l1max: None, seed, mode: SamplingMode::WithReplacement }
    }

    pub fn fixed(batch: usize, seed: u64) -> Self {
        Self {
            delta: 0.1,
            delta_h: 1.0,
            batch: BatchSize::Fixed(batch),
            l1max: None,
            seed,
            mode: SamplingMode::WithReplacement,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.delta_h > 0.0 && self.delta_h.is_finite()) {
            return Err(Error::InvalidInput(format!("Delta_H must be finite and > 0, got {}", self.delta_h)));
        }
        if self.batch == BatchSize::Fixed(0) {
            return Err(Error::InvalidInput("batch must be >= 1".into()));
        }
        Ok(())
    }
}

/// Seeded minibatch Hessian estimator `H~ = (1/|I|) sum_{i in I} H_i`.
#[derive(Debug)]
pub struct SubsampledHessian<'a, F: FiniteSum + ?Sized> {
    problem: &'a F,
    batch: usize,
    mode: SamplingMode,
    rng: ChaCha8Rng,
    last_batch: Vec<usize>,
}

impl<'a, F: FiniteSum + ?Sized> SubsampledHessian<'a, F> {
    /// Resolves the batch size; `Auto` without a known `L1max` estimates it at `x0`.
    pub fn new(problem: &'a F, config: &SubsampleConfig, x0: &Vector) -> Result<Self> {
        config.validate()?;
        let n = problem.n_components();
        if n == 0 {
            return Err(Error::InvalidInput("finite sum has no components".into()));
        }
        let batch = match (config.mode, config.batch) {
            (SamplingMode::Exhaustive, _) => n,
            (_, BatchSize::Fixed(b)) => b,
            (_, BatchSize::Auto) => {
                let l1max = match config.l1max.or_else(|| problem.l1max()) {
                    Some(l) => l,
                    None => estimate_l1max(problem, x0)?,
                };
                if l1max == 0.0 {
                    1
                } else {
                    sample_size(l1max, config.delta, config.delta_h).max(1)
                }
            }
        };
        Ok(Self {
            problem,
            batch,
            mode: config.mode,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            last_batch: Vec::with_capacity(batch),
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Indices used by the most recent product (with multiplicity).
    pub fn last_batch(&self) -> &[usize] {
        &self.last_batch
    }

    /// Units billed per product: `(batch / n) * 2`.
    pub fn units_per_product(&self) -> f64 {
        self.batch as f64 / self.problem.n_components() as f64 * OracleCounter::HVP_COST
    }

    pub fn subsampled_hvp(&mut self, x: &Vector, v: &Vector, counter: &mut OracleCounter) -> Result<Vector> {
        let n = self.problem.n_components();
        self.last_batch.clear();
        match self.mode {
            SamplingMode::Exhaustive => self.last_batch.extend(0..n),
            SamplingMode::WithReplacement => {
                for _ in 0..self.batch {
                    let i = self.rng.random_range(0..n);
                    self.last_batch.push(i);
                }
            }
        }
        let mut acc = Vector::zeros(x.len());
        for &i in &self.last_batch {
            acc += self.problem.component_hvp(i, x, v);
        }
        acc /= self.last_batch.len() as f64;
        counter.bill_subsampled_hvp(self.units_per_product());
        ensure_finite(&acc, "subsampled Hessian-vector product", x)?;
        Ok(acc)
    }
}

impl<F: FiniteSum + ?Sized> HessianProduct for SubsampledHessian<'_, F> {
    fn product(&mut self, x: &Vector, v: &Vector, counter: &mut OracleCounter) -> Result<Vector> {
        self.subsampled_hvp(x, v, counter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticSum;

    #[test]
    fn sample_size_examples() {
        let e_inv = (-1.0f64).exp();
        assert_eq!(sample_size(1.0, e_inv, 1.0), 15);
        let base = sample_size_real(3.0, 0.05, 0.5);
        let doubled = sample_size_real(3.0, 0.05, 1.0);
        assert!((base / 4.0 - doubled).abs() <= 1e-12 * base);
        // delta -> 1 removes the log term
        assert!((sample_size_real(2.0, 1.0 - 1e-15, 1.0) - 4.0).abs() < 1e-5);
    }

    #[test]
    fn error_check_boundary() {
        let g = Vector::from_column_slice(&[1.0, -2.0, 0.5]);
        let hg = Vector::from_column_slice(&[3.0, 1.0, -1.0]);
        assert!(hessian_error_check(&g, &hg, &hg, 0.0));
        // H~ = H + 0.25 I -> exactly on the boundary (all quantities dyadic)
        let shifted = &hg + &g * 0.25;
        assert!(hessian_error_check(&g, &hg, &shifted, 0.25));
        let shifted2 = &hg + &g * 0.5;
        assert!(!hessian_error_check(&g, &hg, &shifted2, 0.25));
    }

    #[test]
    fn exhaustive_mode_matches_exact_hvp() {
        let prob = QuadraticSum::synthetic(10, 4, 3);
        let x = Vector::from_column_slice(&[0.5, -1.0, 2.0, 0.1]);
        let v = Vector::from_column_slice(&[1.0, 0.3, -0.7, 2.0]);
        let cfg = SubsampleConfig { mode: SamplingMode::Exhaustive, ..SubsampleConfig::fixed(1, 0) };
        let mut sh = SubsampledHessian::new(&prob, &cfg, &x).unwrap();
        let mut c = OracleCounter::new();
        let approx = sh.subsampled_hvp(&x, &v, &mut c).unwrap();
        let exact = prob.hvp(&x, &v).unwrap();
        assert!((approx - &exact).norm() <= 1e-12 * exact.norm());
        assert!((c.units() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn billing_is_pro_rata() {
        let prob = QuadraticSum::synthetic(10, 3, 1);
        let x = Vector::zeros(3);
        let mut sh = SubsampledHessian::new(&prob, &SubsampleConfig::fixed(4, 9), &x).unwrap();
        let mut c = OracleCounter::new();
        sh.subsampled_hvp(&x, &Vector::from_element(3, 1.0), &mut c).unwrap();
        sh.subsampled_hvp(&x, &Vector::from_element(3, 1.0), &mut c).unwrap();
        assert!((c.units() - 1.6).abs() < 1e-12);
        assert_eq!(c.subsampled_hvp_evals, 2);
        assert_eq!(c.hvp_evals, 0);
    }

    #[test]
    fn identical_components_are_reproduced_by_any_batch() {
        let prob = QuadraticSum::replicated(2, 3, 5);
        let x = Vector::from_column_slice(&[1.0, 2.0, 3.0]);
        let v = Vector::from_column_slice(&[-1.0, 0.5, 0.25]);
        let exact = prob.hvp(&x, &v).unwrap();
        for b in 1..5 {
            let mut sh = SubsampledHessian::new(&prob, &SubsampleConfig::fixed(b, b as u64), &x).unwrap();
            let approx = sh.subsampled_hvp(&x, &v, &mut OracleCounter::new()).unwrap();
            assert!((approx - &exact).norm() <= 1e-12 * exact.norm());
        }
    }

    #[test]
    fn auto_batch_uses_problem_bound() {
        let prob = QuadraticSum::synthetic(10, 3, 2);
        let l1 = prob.l1max().unwrap();
        let cfg = SubsampleConfig::auto(0.1, 0.5, 0);
        let sh = SubsampledHessian::new(&prob, &cfg, &Vector::zeros(3)).unwrap();
        assert_eq!(sh.batch_size(), sample_size(l1, 0.1, 0.5));
    }

    #[test]
    fn same_seed_same_batches() {
        let prob = QuadraticSum::synthetic(10, 3, 2);
        let x = Vector::from_element(3, 1.0);
        let cfg = SubsampleConfig::fixed(5, 42);
        let mut a = SubsampledHessian::new(&prob, &cfg, &x).unwrap();
        let mut b = SubsampledHessian::new(&prob, &cfg, &x).unwrap();
        for _ in 0..10 {
            let ra = a.subsampled_hvp(&x, &x, &mut OracleCounter::new()).unwrap();
            let rb = b.subsampled_hvp(&x, &x, &mut OracleCounter::new()).unwrap();
            assert_eq!(ra, rb);
            assert_eq!(a.last_batch(), b.last_batch());
        }
    }
}
