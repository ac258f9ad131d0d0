//! Curvature-aware scaled gradient descent with Armijo line searches.
//!
//! The step along `-g` is scaled by a second-order estimate taken from one
//! Hessian-vector product: conjugate-gradient (`CG`), minimal-residual (`MR`)
//! or their geometric mean (`GM`) under strong positive curvature, and fixed
//! fallbacks otherwise. Baseline optimizers, test problems and subsampled
//! Hessian products share the same oracle accounting.

pub mod error;
pub mod inexact;
pub mod linesearch;
pub mod optimizers;
pub mod oracle;
pub mod problems;
pub mod scaling;

pub use error::{Error, Result};
pub use linesearch::{armijo_holds, backtrack, forward_track, ArmijoParams, LineSearchOutcome};
pub use optimizers::{IterateRecord, RunConfig, RunError, RunStatus, ScaledGd, Trace};
pub use oracle::{OracleCounter, ParamVector, Problem, Vector};
pub use scaling::{CurvatureFlag, CurvatureProbe, ScalingConfig, ScalingDecision, SpcRule};
