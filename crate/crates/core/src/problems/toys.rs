//! Small nonconvex test functions and a reparameterization wrapper.

use crate::oracle::{CurvatureEstimates, Problem, Vector};

/// `f(x) = x^4/4 - x^2/2`, minimizers at `+-1`, NC for `|x| < 1/sqrt(3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quartic1D;

impl Problem for Quartic1D {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &Vector) -> f64 {
        let t = x[0];
        0.25 * t.powi(4) - 0.5 * t * t
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let t = x[0];
        Vector::from_element(1, t.powi(3) - t)
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        Some(v * (3.0 * x[0] * x[0] - 1.0))
    }

    fn known_optimal_value(&self) -> Option<f64> {
        Some(-0.25)
    }
}

/// `f(x) = (1 - x1)^2 + 100 (x2 - x1^2)^2`, minimizer `(1, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rosenbrock2D;

impl Rosenbrock2D {
    pub fn standard_start() -> Vector {
        Vector::from_column_slice(&[-1.2, 1.0])
    }
}

impl Problem for Rosenbrock2D {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &Vector) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let (a, b) = (x[0], x[1]);
        let r = b - a * a;
        Vector::from_column_slice(&[-2.0 * (1.0 - a) - 400.0 * a * r, 200.0 * r])
    }

    fn hvp(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        let (a, b) = (x[0], x[1]);
        let h11 = 2.0 - 400.0 * (b - 3.0 * a * a);
        let h12 = -400.0 * a;
        let h22 = 200.0;
        Some(Vector::from_column_slice(&[h11 * v[0] + h12 * v[1], h12 * v[0] + h22 * v[1]]))
    }

    fn known_optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `g(y) = f(c y)` for a nonzero scalar `c`.
#[derive(Debug, Clone)]
pub struct Rescaled<P> {
    pub inner: P,
    pub c: f64,
}

impl<P: Problem> Rescaled<P> {
    pub fn new(inner: P, c: f64) -> Self {
        assert!(c != 0.0 && c.is_finite(), "rescaling factor must be finite and nonzero");
        Self { inner, c }
    }
}

impl<P: Problem> Problem for Rescaled<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, y: &Vector) -> f64 {
        self.inner.value(&(y * self.c))
    }

    fn gradient(&self, y: &Vector) -> Vector {
        self.inner.gradient(&(y * self.c)) * self.c
    }

    fn hvp(&self, y: &Vector, v: &Vector) -> Option<Vector> {
        self.inner.hvp(&(y * self.c), v).map(|hv| hv * (self.c * self.c))
    }

    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        let c2 = self.c * self.c;
        self.inner.curvature_estimates().map(|e| CurvatureEstimates { mu: e.mu * c2, l: e.l * c2 })
    }

    fn known_optimal_value(&self) -> Option<f64> {
        self.inner.known_optimal_value()
    }
}
