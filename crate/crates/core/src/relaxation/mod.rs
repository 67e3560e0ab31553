//! Convex relaxation and majorization: basis pursuit, iteratively reweighted
//! ℓ1, gradient projection (GPSR), and smoothed ℓ0.

mod gpsr;
mod irl1;
mod lp;
mod sl0;

pub use gpsr::{gpsr_objective, gpsr_recover, gpsr_solve, GpsrConfig, GpsrTrace};
pub use irl1::{irl1_recover, irl1_solve, irl1_weights, log_sum, Irl1Config, Irl1Trace};
pub use lp::{weighted_l1_min, L1Solution, LpSolverConfig};
pub use sl0::{sigma_ladder, sl0_recover, sl0_solve, smoothed_l0, Sl0Config, Sl0Trace};

use crate::error::Result;
use crate::problem::ProblemInstance;
use crate::solution::{RecoverySolution, Termination};

/// Basis pursuit with its dual certificate.
pub fn bp_solve(p: &ProblemInstance, cfg: &LpSolverConfig) -> Result<(RecoverySolution, L1Solution)> {
    if p.measurement_norm() == 0.0 {
        let lp = L1Solution {
            x: alloc::vec![0.0; p.n()],
            dual: alloc::vec![0.0; p.m()],
            gap: 0.0,
            iterations: 0,
            converged: true,
        };
        return Ok((RecoverySolution::zero(p), lp));
    }
    let w = alloc::vec![1.0; p.n()];
    let lp = weighted_l1_min(&p.phi, &p.u, &w, cfg)?;
    let term = if lp.converged { Termination::Converged } else { Termination::Stalled };
    let sol = RecoverySolution::from_estimate(p, lp.x.clone(), lp.iterations, term, alloc::vec![p.measurement_norm()]);
    Ok((sol, lp))
}

/// Basis pursuit: `min ||x||_1` subject to `phi x = u`.
pub fn bp_recover(p: &ProblemInstance, cfg: &LpSolverConfig) -> Result<RecoverySolution> {
    bp_solve(p, cfg).map(|(s, _)| s)
}
