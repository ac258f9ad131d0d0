use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by oracles, scalings, line searches and problem loaders.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An oracle produced a non-finite value or vector.
    #[error("non-finite {what} at x = {x:?}")]
    NumericalFailure { what: &'static str, x: Vec<f64> },

    /// A finite-difference Hessian-vector product was requested along v = 0.
    #[error("finite-difference HVP requested along a zero direction")]
    ZeroDirection,

    /// Floating-point pathology that contradicts the curvature classification.
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    /// A caller-declared contract (e.g. strong convexity with sigma = 0) was broken.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Backtracking exhausted its trial budget without satisfying Armijo.
    #[error("line search stalled after {trials} trials (last alpha = {alpha:e}, f0 = {f0:e}, f_last = {f_last:e})")]
    LineSearchStall {
        alpha: f64,
        f0: f64,
        f_last: f64,
        trials: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
