//! Differentiable-problem contract and oracle-call accounting.
//!
//! Every optimizer in this crate talks to its objective through the free
//! functions in this module, which bill each call to an [`OracleCounter`]
//! under a fixed cost model: a function value costs one unit, a gradient one
//! more unit, and a Hessian-vector product two more units.

use std::ops::Deref;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Strong-convexity and smoothness estimates a problem may advertise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureEstimates {
    pub mu: f64,
    pub l: f64,
}

/// A twice-differentiable objective `f: R^d -> R`.
///
/// Implementations must be immutable after construction so a single problem
/// can back several concurrent runs.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Analytic Hessian-vector product `H(x) v`.
    ///
    /// Returning `None` routes [`eval_hvp`] through the finite-difference
    /// fallback [`fd_hvp`].
    fn hvp(&self, _x: &Vector, _v: &Vector) -> Option<Vector> {
        None
    }

    /// Known or estimated `(mu, L)` bounds on the Hessian spectrum.
    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        None
    }

    /// `inf f` when known in closed form.
    fn known_optimal_value(&self) -> Option<f64> {
        None
    }
}

impl<P: Problem + ?Sized> Problem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn hvp(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        (**self).hvp(x, v)
    }
    fn curvature_estimates(&self) -> Option<CurvatureEstimates> {
        (**self).curvature_estimates()
    }
    fn known_optimal_value(&self) -> Option<f64> {
        (**self).known_optimal_value()
    }
}

/// A point in `R^d` with all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vector);

impl ParamVector {
    pub fn new(v: Vector) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidInput("parameter vector must have length >= 1".into()));
        }
        if let Some(i) = v.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidInput(format!("entry {i} of parameter vector is not finite")));
        }
        Ok(Self(v))
    }

    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(xs))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(Vector::zeros(d))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = Vector;

    fn deref(&self) -> &Vector {
        &self.0
    }
}

/// Tally of oracle calls in equivalent function evaluations.
///
/// `units()` is derived from the counts on every read, so the cost-model
/// identity can never drift from the tallies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleCounter {
    pub f_evals: u64,
    pub g_evals: u64,
    pub hvp_evals: u64,
    /// Subsampled HVPs, billed pro rata as `(batch / n) * 2` units each.
    pub subsampled_hvp_evals: u64,
    pub subsampled_hvp_units: f64,
}

impl OracleCounter {
    pub const F_COST: f64 = 1.0;
    pub const G_COST: f64 = 1.0;
    pub const HVP_COST: f64 = 2.0;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn units(&self) -> f64 {
        self.f_evals as f64 * Self::F_COST
            + self.g_evals as f64 * Self::G_COST
            + self.hvp_evals as f64 * Self::HVP_COST
            + self.subsampled_hvp_units
    }

    pub fn bill_subsampled_hvp(&mut self, units: f64) {
        debug_assert!(units >= 0.0);
        self.subsampled_hvp_evals += 1;
        self.subsampled_hvp_units += units;
    }
}

fn check_len(x: &Vector, d: usize, what: &str) -> Result<()> {
    if x.len() != d {
        return Err(Error::InvalidInput(format!(
            "{what} has length {} but problem dimension is {d}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn ensure_finite(v: &Vector, what: &'static str, x: &Vector) -> Result<()> {
    if v.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure { what, x: x.as_slice().to_vec() })
    }
}

/// `f(x)`, billed as one function evaluation.
pub fn eval_value<P: Problem + ?Sized>(problem: &P, x: &Vector, counter: &mut OracleCounter) -> Result<f64> {
    check_len(x, problem.dim(), "x")?;
    counter.f_evals += 1;
    let f = problem.value(x);
    if !f.is_finite() {
        return Err(Error::NumericalFailure { what: "function value", x: x.as_slice().to_vec() });
    }
    Ok(f)
}

/// `grad f(x)`, billed as one gradient evaluation.
pub fn eval_gradient<P: Problem + ?Sized>(problem: &P, x: &Vector, counter: &mut OracleCounter) -> Result<Vector> {
    check_len(x, problem.dim(), "x")?;
    counter.g_evals += 1;
    let g = problem.gradient(x);
    check_len(&g, problem.dim(), "gradient")?;
    ensure_finite(&g, "gradient", x)?;
    Ok(g)
}

/// `H(x) v`, using the analytic product when the problem has one.
pub fn eval_hvp<P: Problem + ?Sized>(
    problem: &P,
    x: &Vector,
    v: &Vector,
    counter: &mut OracleCounter,
) -> Result<Vector> {
    check_len(x, problem.dim(), "x")?;
    check_len(v, problem.dim(), "direction")?;
    ensure_finite(v, "HVP direction", x)?;
    match problem.hvp(x, v) {
        Some(hv) => {
            counter.hvp_evals += 1;
            check_len(&hv, problem.dim(), "HVP")?;
            ensure_finite(&hv, "Hessian-vector product", x)?;
            Ok(hv)
        }
        None => {
            if v.iter().all(|&e| e == 0.0) {
                return Ok(Vector::zeros(v.len()));
            }
            fd_hvp(problem, x, v, counter)
        }
    }
}

/// Central-difference HVP along the normalized direction.
///
/// Uses `h = sqrt(eps) * (1 + ||x||)` and rescales by `||v||`; bills two
/// gradient evaluations.
pub fn fd_hvp<P: Problem + ?Sized>(problem: &P, x: &Vector, v: &Vector, counter: &mut OracleCounter) -> Result<Vector> {
    check_len(x, problem.dim(), "x")?;
    check_len(v, problem.dim(), "direction")?;
    let vnorm = v.norm();
    if vnorm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    ensure_finite(v, "HVP direction", x)?;
    let vhat = v / vnorm;
    let h = f64::EPSILON.sqrt() * (1.0 + x.norm());
    let plus = x + &vhat * h;
    let minus = x - &vhat * h;
    let gp = eval_gradient(problem, &plus, counter)?;
    let gm = eval_gradient(problem, &minus, counter)?;
    let hv = (gp - gm) * (vnorm / (2.0 * h));
    ensure_finite(&hv, "finite-difference HVP", x)?;
    Ok(hv)
}

/// Source of the curvature products `H v` used by the scaled optimizers.
pub trait HessianProduct {
    fn product(&mut self, x: &Vector, v: &Vector, counter: &mut OracleCounter) -> Result<Vector>;
}

/// Exact products through [`eval_hvp`].
#[derive(Debug, Clone, Copy)]
pub struct ExactHessian<'a, P: ?Sized>(pub &'a P);

impl<P: Problem + ?Sized> HessianProduct for ExactHessian<'_, P> {
    fn product(&mut self, x: &Vector, v: &Vector, counter: &mut OracleCounter) -> Result<Vector> {
        eval_hvp(self.0, x, v, counter)
    }
}
