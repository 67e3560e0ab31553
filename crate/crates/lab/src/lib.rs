//! Experiment harness for sparse-recovery phase-transition sweeps.
//!
//! A run enumerates `(algorithm, distribution, delta, rho)` cells, executes
//! the trials of each cell on a worker pool, journals finished cells so an
//! interrupted run can resume, and writes `trials.csv`, `success.csv`,
//! `phase.csv` and `summary.json`.

pub mod config;
pub mod error;
pub mod run;
pub mod store;
pub mod tables;
pub mod trial;

pub use config::{ExperimentConfig, PhiPolicy};
pub use error::LabError;
pub use run::{run_suite, RunOptions, RunReport};
pub use store::ResultStore;
pub use tables::emit_tables;
pub use trial::{run_trial, CellSpec, TrialContext};
