use alloc::vec::Vec;

use super::lp::{weighted_l1_min, LpSolverConfig};
use crate::error::Result;
use crate::numerics::vector::{norm2, sub};
use crate::problem::ProblemInstance;
use crate::solution::{measurement_residual_norm, RecoverySolution, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Irl1Config {
    pub epsilon: f64,
    pub max_outer: usize,
    /// Stop when `||x_{k+1} - x_k|| <= change_tol * ||x_k||`.
    pub change_tol: f64,
    pub lp: LpSolverConfig,
}

impl Default for Irl1Config {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            max_outer: 4,
            change_tol: 1e-5,
            lp: LpSolverConfig::default(),
        }
    }
}

/// Per outer iteration: the log-sum objective and the inner solver's iterations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Irl1Trace {
    pub log_sum: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    pub inner_converged: Vec<bool>,
}

/// `1 / (|x_n| + eps)`
pub fn irl1_weights(x: &[f64], eps: f64) -> Vec<f64> {
    x.iter().map(|v| 1.0 / (v.abs() + eps)).collect()
}

/// `sum_n log(|x_n| + eps)`
pub fn log_sum(x: &[f64], eps: f64) -> f64 {
    x.iter().map(|v| libm::log(v.abs() + eps)).sum()
}

pub fn irl1_solve(p: &ProblemInstance, cfg: &Irl1Config) -> Result<(RecoverySolution, Irl1Trace)> {
    let mut trace = Irl1Trace::default();
    if p.measurement_norm() == 0.0 {
        return Ok((RecoverySolution::zero(p), trace));
    }
    let mut w = alloc::vec![1.0; p.n()];
    let mut x: Option<Vec<f64>> = None;
    let mut history = alloc::vec![p.measurement_norm()];
    let mut all_converged = true;
    let mut termination = Termination::IterationCap;
    for _ in 0..cfg.max_outer {
        let lp = weighted_l1_min(&p.phi, &p.u, &w, &cfg.lp)?;
        let obj = log_sum(&lp.x, cfg.epsilon);
        trace.inner_iterations.push(lp.iterations);
        trace.inner_converged.push(lp.converged);
        all_converged &= lp.converged;
        history.push(measurement_residual_norm(p, &lp.x));
        if let Some(prev) = &x {
            // The majorizer guarantees descent; a rise only reflects inner
            // solver tolerance, so keep the previous iterate.
            if obj > *trace.log_sum.last().expect("previous objective") {
                termination = Termination::Converged;
                break;
            }
            let change = norm2(&sub(&lp.x, prev));
            trace.log_sum.push(obj);
            let stop = change <= cfg.change_tol * norm2(prev);
            x = Some(lp.x);
            if stop {
                termination = Termination::Converged;
                break;
            }
        } else {
            trace.log_sum.push(obj);
            x = Some(lp.x);
        }
        w = irl1_weights(x.as_ref().expect("iterate"), cfg.epsilon);
    }
    if !all_converged {
        termination = Termination::Stalled;
    }
    let x = x.expect("at least one outer iteration");
    let iterations = trace.log_sum.len();
    Ok((RecoverySolution::from_estimate(p, x, iterations, termination, history), trace))
}

/// Iteratively reweighted ℓ1 minimization.
pub fn irl1_recover(p: &ProblemInstance, cfg: &Irl1Config) -> Result<RecoverySolution> {
    irl1_solve(p, cfg).map(|(s, _)| s)
}
