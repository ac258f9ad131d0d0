//! Multi-class logistic regression with the last class pinned to zero.
//!
//! Parameters are laid out class-major: `x = [w_1; ...; w_{C-1}]`, each `w_c`
//! of length `p` (number of feature columns, bias included when present).
//! The objective is the average softmax cross-entropy plus `lambda/2 ||x||^2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::inexact::FiniteSum;
use crate::oracle::{CurvatureEstimates, Problem, Vector};

#[derive(Debug, Clone)]
pub struct LogisticProblem {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    lambda: f64,
    bound: SpectrumBound,
}

/// Hessian spectrum bounds `lambda I <= H <= L I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBound {
    pub mu_approx: f64,
    pub l_approx: f64,
    /// `||A||_2^2` used in the bound.
    pub data_norm2: f64,
    /// False when power iteration stalled and the Frobenius norm was used instead.
    pub power_iteration_converged: bool,
}

impl LogisticProblem {
    /// `features` is `n x p` and used as-is; `labels` are class indices in `0..n_classes`.
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, n_classes: usize, lambda: f64) -> Result<Self> {
        let n = features.nrows();
        if n == 0 || features.ncols() == 0 {
            return Err(Error::InvalidInput("logistic regression needs a nonempty data matrix".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidInput(format!("{} labels for {n} samples", labels.len())));
        }
        if n_classes < 2 {
            return Err(Error::InvalidInput("logistic regression needs at least 2 classes".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidInput(format!("label {bad} out of range for {n_classes} classes")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("data matrix has non-finite entries".into()));
        }
        let bound = spectrum_bound(&features, n_classes, lambda);
        Ok(Self { features, labels, n_classes, lambda, bound })
    }

    /// Appends a constant-one bias column before constructing.
    pub fn with_bias(features: DMatrix<f64>, labels: Vec<usize>, n_classes: usize, lambda: f64) -> Result<Self> {
        let n = features.nrows();
        let p = features.ncols();
        let augmented = features.insert_column(p, 1.0);
        debug_assert_eq!(augmented.nrows(), n);
        Self::new(augmented, labels, n_classes, lambda)
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn spectrum_bound(&self) -> SpectrumBound {
        self.bound
    }

    fn weights(&self, x: &Vector) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_classes - 1, self.n_features(), x.as_slice())
    }

    fn flatten(m: DMatrix<f64>) -> Vector {
        Vector::from_column_slice(m.transpose().as_slice())
    }

    /// Logits `z_ic = <w_c, a_i>` for the free classes, `n x (C-1)`.
    fn logits(&self, x: &Vector) -> DMatrix<f64> {
        &self.features * self.weights(x).transpose()
    }

    /// Row-wise log-sum-exp over the free logits and the pinned zero logit.
    fn log_partition(z: &[f64]) -> f64 {
        let m = z.iter().copied().fold(0.0, f64::max);
        let s: f64 = (-m).exp() + z.iter().map(|&zc| (zc - m).exp()).sum::<f64>();
        m + s.ln()
    }

    fn sample_loss(&self, zi: &[f64], label: usize) -> f64 {
        let lse = Self::log_partition(zi);
        let picked = if label < self.n_classes - 1 { zi[label] } else { 0.0 };
        lse - picked
    }

    /// Probabilities of the free classes for every sample, `n x (C-1)`.
    fn probabilities(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut pi = z.clone();
        let k = self.n_classes - 1;
        for i in 0..z.nrows() {
            let row: Vec<f64> = (0..k).map(|c| z[(i, c)]).collect();
            let lse = Self::log_partition(&row);
            for c in 0..k {
                pi[(i, c)] = (row[c] - lse).exp();
            }
        }
        pi
    }

    fn regularizer(&self, x: &Vector) -> f64 {
        0.5 * self.lambda * x.norm_squared()
    }

    fn row(&self, i: usize) -> Vector {
        self.features.row(i).transpose()
    }

    fn sample_logits(&self, i: usize, x: &Vector) -> Vec<f64> {
        let a = self.row(i);
        let w = self.weights(x);
        (0..self.n_classes - 1).map(|c| w.row(c).transpose().dot(&a)).collect()
    }

    fn sample_probs(zi: &[f64]) -> Vec<f64> {
        let lse = Self::log_partition(zi);
        zi.iter().map(|&z| (z - lse).exp()).collect()
    }
}

impl Problem for LogisticProblem {
    fn dim(&self) -> usize {
        (self.n_classes - 1) * self.n_features()
    }

    fn value(&self, x: &Vector) -> f64 {
        let z = self.logits(x);
        let n = self.n_samples();
        let k = self.n_classes - 1;
        let mut total = 0.0;
        let mut zi = vec![0.0; k];
        for i in 0..n {
            for c in 0..k {
                zi[c] = z[(i, c)];
            }
            total += self.sample_loss(&zi, self.labels[i]);
        }
        total / n as f64 + self.regularizer(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let z = self.logits(x);
        let mut r = self.probabilities(&z);
        for (i, &l) in self.labels.iter().enumerate() {
            if l < self.n_classes - 1 {
                r[(i, l)] -= 1.0;
            }
        }
        let g = r.transpose() * &self.features / self.n_samples() as f64;
        Self::flatten(g) + x * self.lambda
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        let z = self.logits(x);
        let pi = self.probabilities(&z);
        let u = &self.features * self.weights(v).transpose();
        let mut s = pi.component_mul(&u);
        for i in 0..s.nrows() {
            let t: f64 = s.row(i).sum();
            for c in 0..s.ncols() {
                s[(i, c)] -= pi[(i, c)] * t;
            }
        }
        let hv = s.transpose() * &self.features / self.n_samples() as f64;
        Some(Self::flatten(hv) + v * self.lambda)
    }

    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        (self.lambda > 0.0).then_some(CurvatureEstimates { mu: self.bound.mu_approx, l: self.bound.l_approx })
    }
}

/// Each sample is one component, carrying the full regularizer.
impl FiniteSum for LogisticProblem {
    fn n_components(&self) -> usize {
        self.n_samples()
    }

    fn component_value(&self, i: usize, x: &Vector) -> f64 {
        self.sample_loss(&self.sample_logits(i, x), self.labels[i]) + self.regularizer(x)
    }

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector {
        let a = self.row(i);
        let mut r = Self::sample_probs(&self.sample_logits(i, x));
        if self.labels[i] < self.n_classes - 1 {
            r[self.labels[i]] -= 1.0;
        }
        let p = self.n_features();
        let mut g = x * self.lambda;
        for (c, rc) in r.iter().enumerate() {
            let mut block = g.rows_mut(c * p, p);
            block.axpy(*rc, &a, 1.0);
        }
        g
    }

    fn component_hvp(&self, i: usize, x: &Vector, v: &Vector) -> Vector {
        let a = self.row(i);
        let pi = Self::sample_probs(&self.sample_logits(i, x));
        let vw = self.weights(v);
        let u: Vec<f64> = (0..pi.len()).map(|c| vw.row(c).transpose().dot(&a)).collect();
        let t: f64 = pi.iter().zip(&u).map(|(p, u)| p * u).sum();
        let p = self.n_features();
        let mut out = v * self.lambda;
        for c in 0..pi.len() {
            let coef = pi[c] * (u[c] - t);
            let mut block = out.rows_mut(c * p, p);
            block.axpy(coef, &a, 1.0);
        }
        out
    }
}

/// `mu = lambda`, `L = (C-1)/(4n) ||A||_2^2 + lambda`.
pub fn logistic_spectrum_bound(problem: &LogisticProblem) -> SpectrumBound {
    problem.spectrum_bound()
}

fn spectrum_bound(features: &DMatrix<f64>, n_classes: usize, lambda: f64) -> SpectrumBound {
    let n = features.nrows() as f64;
    let (data_norm2, converged) = match spectral_norm2(features, 1e-8, 1000) {
        Some(s) => (s, true),
        None => (features.norm_squared(), false),
    };
    SpectrumBound {
        mu_approx: lambda,
        l_approx: (n_classes as f64 - 1.0) / (4.0 * n) * data_norm2 + lambda,
        data_norm2,
        power_iteration_converged: converged,
    }
}

/// Power iteration for `||A||_2^2 = lambda_max(A^T A)`.
pub fn spectral_norm2(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Option<f64> {
    let p = a.ncols();
    // Deterministic start with distinct entries so it is not orthogonal to
    // the dominant direction for structured data.
    let mut v = Vector::from_fn(p, |i, _| 1.0 + 0.01 * (i as f64 + 1.0).sqrt());
    v.normalize_mut();
    let mut est = 0.0;
    for _ in 0..max_iter {
        let w = a.transpose() * (a * &v);
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return Some(0.0);
        }
        v = w / wn;
        if (next - est).abs() <= tol * next.abs() {
            return Some(next.max(wn));
        }
        est = next;
    }
    None
}
