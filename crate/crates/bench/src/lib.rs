//! Experiment harness: TOML configs, parallel run matrices, grid tuning and CSV traces.

pub mod config;
pub mod error;
pub mod runner;
pub mod selftest;
pub mod trace_io;

pub use config::{Experiment, Method, MethodEntry, ProblemInstance};
pub use error::BenchError;
pub use runner::{run_experiment, run_method, tune_grid, ExperimentReport, SummaryRow, TuneReport};
pub use trace_io::{emit_trace, read_trace};
