//! Sparse recovery from noiseless compressed measurements `u = phi x`:
//! problem generators, fifteen recovery algorithms, and the evaluation
//! machinery for empirical phase transitions.

#![no_std]

extern crate alloc;

mod algorithm;
pub mod error;
pub mod evaluation;
pub mod greedy;
pub mod numerics;
pub mod oracle;
pub mod problem;
pub mod relaxation;
pub mod seed;
pub mod solution;
pub mod thresholding;

pub use algorithm::{recover, Algorithm, AlgorithmConfig};
pub use error::{Error, Result};
pub use evaluation::{debias, RecoveryCriterion, TrialRecord};
pub use numerics::DenseMatrix;
pub use problem::{build_problem, DistributionSpec, ProblemInstance, SuiteGrid};
pub use solution::{RecoverySolution, Termination};
