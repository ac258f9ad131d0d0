use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::inexact::FiniteSum;
use crate::oracle::{CurvatureEstimates, Problem, Vector};
use crate::problems::seeded_rng;

/// `f(x) = 1/2 <x, A x> - <b, x>` with dense symmetric `A`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: DMatrix<f64>,
    b: Vector,
    mu: f64,
    m: f64,
    minimizer: Option<Vector>,
}

impl QuadraticProblem {
    pub fn new(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        let d = a.nrows();
        if d == 0 || a.ncols() != d || b.len() != d {
            return Err(Error::InvalidInput(format!(
                "quadratic needs square A matching b, got {}x{} and {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        for i in 0..d {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!("A is not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = a.clone().symmetric_eigenvalues();
        let mu = eig.min();
        let m = eig.max();
        let minimizer = if mu > 0.0 { a.clone().cholesky().map(|c| c.solve(&b)) } else { None };
        Ok(Self { a, b, mu, m, minimizer })
    }

    pub fn diagonal(diag: &[f64], b: &[f64]) -> Result<Self> {
        let a = DMatrix::from_diagonal(&Vector::from_column_slice(diag));
        Self::new(a, Vector::from_column_slice(b))
    }

    /// Random SPD quadratic with extreme eigenvalues exactly `mu` and `m`.
    ///
    /// Interior eigenvalues are log-uniform in `[mu, m]`; the eigenbasis is a
    /// random orthogonal matrix and `b` is standard normal.
    pub fn random_spd(d: usize, mu: f64, m: f64, seed: u64) -> Result<Self> {
        if !(mu > 0.0 && m >= mu) {
            return Err(Error::InvalidInput(format!("need 0 < mu <= M, got mu = {mu}, M = {m}")));
        }
        let mut rng = seeded_rng(seed);
        let mut eig: Vec<f64> = (0..d)
            .map(|i| match i {
                0 => mu,
                i if i == d - 1 => m,
                _ => (mu.ln() + rng.random::<f64>() * (m.ln() - mu.ln())).exp(),
            })
            .collect();
        eig.sort_by(f64::total_cmp);
        let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
        let q = g.qr().q();
        let a = &q * DMatrix::from_diagonal(&Vector::from_vec(eig)) * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let b = Vector::from_fn(d, |_, _| rng.sample(StandardNormal));
        Self::new(a, b)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    /// Smallest eigenvalue of `A`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Largest eigenvalue of `A`.
    pub fn big_m(&self) -> f64 {
        self.m
    }

    /// `A^{-1} b`, present when `A` is positive definite.
    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }

    pub fn optimal_value(&self) -> Option<f64> {
        self.minimizer.as_ref().map(|xs| -0.5 * self.b.dot(xs))
    }

    /// `f(x) - f* = 1/2 (x - x*)^T A (x - x*)`, free of cancellation.
    pub fn suboptimality(&self, x: &Vector) -> Option<f64> {
        self.minimizer.as_ref().map(|xs| {
            let e = x - xs;
            0.5 * e.dot(&(&self.a * &e))
        })
    }
}

impl Problem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x)) - self.b.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }

    fn hvp(&self, _x: &Vector, v: &Vector) -> Option<Vector> {
        Some(&self.a * v)
    }

    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        (self.mu > 0.0).then_some(CurvatureEstimates { mu: self.mu, l: self.m })
    }

    fn known_optimal_value(&self) -> Option<f64> {
        self.optimal_value()
    }
}

/// Finite sum of quadratics `f_i = 1/2 <x, A_i x> - <b_i, x>`.
#[derive(Debug, Clone)]
pub struct QuadraticSum {
    components: Vec<(DMatrix<f64>, Vector)>,
    mean: QuadraticProblem,
    l1max: f64,
}

impl QuadraticSum {
    pub fn new(components: Vec<(DMatrix<f64>, Vector)>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidInput("finite sum needs at least one component".into()));
        }
        let d = components[0].1.len();
        let mut a = DMatrix::zeros(d, d);
        let mut b = Vector::zeros(d);
        let mut l1max: f64 = 0.0;
        for (ai, bi) in &components {
            if ai.nrows() != d || ai.ncols() != d || bi.len() != d {
                return Err(Error::InvalidInput("finite-sum components have mismatched dimensions".into()));
            }
            a += ai;
            b += bi;
            l1max = l1max.max(ai.clone().symmetric_eigenvalues().amax());
        }
        a /= n as f64;
        b /= n as f64;
        let mean = QuadraticProblem::new(a, b)?;
        Ok(Self { components, mean, l1max })
    }

    /// `n` random SPD components in dimension `d` with widely varying spectra.
    pub fn synthetic(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let components = (0..n)
            .map(|_| {
                let mu = 0.1 + rng.random::<f64>();
                let m = mu * (1.0 + 9.0 * rng.random::<f64>());
                let q = QuadraticProblem::random_spd(d, mu, m, rng.random()).expect("valid spectrum");
                (q.a, q.b)
            })
            .collect();
        Self::new(components).expect("consistent synthetic components")
    }

    /// `n` copies of one random component.
    pub fn replicated(n: usize, d: usize, seed: u64) -> Self {
        let q = QuadraticProblem::random_spd(d, 0.5, 3.0, seed).expect("valid spectrum");
        Self::new(vec![(q.a, q.b); n]).expect("consistent components")
    }

    pub fn mean(&self) -> &QuadraticProblem {
        &self.mean
    }
}

impl Problem for QuadraticSum {
    fn dim(&self) -> usize {
        self.mean.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.mean.value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.mean.gradient(x)
    }
    fn hvp(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        self.mean.hvp(x, v)
    }
    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        self.mean.curvature_estimates()
    }
    fn known_optimal_value(&self) -> Option<f64> {
        self.mean.optimal_value()
    }
}

impl FiniteSum for QuadraticSum {
    fn n_components(&self) -> usize {
        self.components.len()
    }

    fn component_value(&self, i: usize, x: &Vector) -> f64 {
        let (a, b) = &self.components[i];
        0.5 * x.dot(&(a * x)) - b.dot(x)
    }

    fn component_gradient(&self, i: usize, x: &Vector) -> Vector {
        let (a, b) = &self.components[i];
        a * x - b
    }

    fn component_hvp(&self, i: usize, _x: &Vector, v: &Vector) -> Vector {
        &self.components[i].0 * v
    }

    /// `max_i ||A_i||_2`
    fn l1max(&self) -> Option<f64> {
        Some(self.l1max)
    }
}
