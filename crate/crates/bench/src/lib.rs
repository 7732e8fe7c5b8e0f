//! Experiment harness for the CPCP solvers: grid configuration, paired trials,
//! CSV and plot-data output, and an invariant suite for the splitting methods.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod verify;

pub use config::{Cell, RunConfig, SolverConfig, OUTPUT_DIR_ENV};
pub use error::{BenchError, Result};
pub use output::{emit_csv, emit_json, emit_plot_data, NOT_CONVERGED};
pub use runner::{
    run_grid, run_grid_with_threads, solve_one, Aggregate, Environment, RunRecord, SolveRecord,
    TrialOutcome, TrialPair,
};
pub use verify::{run_verify, Check, VerifySettings};

/// Inertial weights of the α sweep: 0.05, 0.10, …, 0.35.
pub fn default_alpha_sweep() -> Vec<f64> {
    (1..=7).map(|i| i as f64 * 0.05).collect()
}
