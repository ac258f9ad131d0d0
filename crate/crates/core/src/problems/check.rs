//! Central-difference validation of analytic gradients and HVPs.
//!
//! These helpers call the problem directly and are never billed.

use crate::oracle::{Problem, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    /// `max_i |analytic_i - fd_i| / max(1, |fd_i|)`
    pub max_rel_dev: f64,
    pub worst_index: usize,
    pub passed: bool,
}

fn step(xi: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + xi.abs())
}

/// Coordinate-wise central differences of `f`.
pub fn central_gradient<P: Problem + ?Sized>(problem: &P, x: &Vector) -> Vector {
    let mut out = Vector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let h = step(x[i]);
        xp[i] = x[i] + h;
        let fp = problem.value(&xp);
        xp[i] = x[i] - h;
        let fm = problem.value(&xp);
        xp[i] = x[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
    out
}

/// Central difference of the gradient along `v`.
pub fn central_hvp<P: Problem + ?Sized>(problem: &P, x: &Vector, v: &Vector) -> Vector {
    let vn = v.norm();
    if vn == 0.0 {
        return Vector::zeros(x.len());
    }
    let h = f64::EPSILON.cbrt() * (1.0 + x.norm()) / vn;
    (problem.gradient(&(x + v * h)) - problem.gradient(&(x - v * h))) / (2.0 * h)
}

fn compare(analytic: &Vector, reference: &Vector, tol: f64) -> CheckReport {
    let mut worst = (0.0, 0);
    for i in 0..analytic.len() {
        let dev = (analytic[i] - reference[i]).abs() / reference[i].abs().max(1.0);
        if !(dev <= worst.0) {
            worst = (dev, i);
        }
    }
    CheckReport { max_rel_dev: worst.0, worst_index: worst.1, passed: worst.0 <= tol }
}

pub fn grad_check<P: Problem + ?Sized>(problem: &P, x: &Vector, tol: f64) -> CheckReport {
    compare(&problem.gradient(x), &central_gradient(problem, x), tol)
}

/// Fails with `max_rel_dev = inf` when the problem has no analytic HVP.
pub fn hvp_check<P: Problem + ?Sized>(problem: &P, x: &Vector, v: &Vector, tol: f64) -> CheckReport {
    match problem.hvp(x, v) {
        Some(hv) => compare(&hv, &central_hvp(problem, x, v), tol),
        None => CheckReport { max_rel_dev: f64::INFINITY, worst_index: 0, passed: false },
    }
}
