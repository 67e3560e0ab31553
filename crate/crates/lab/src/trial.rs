//! One trial: build the problem, recover, debias, evaluate.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use recover_core::evaluation::{check_l2, check_support, debias, CriterionKind, RecoveryCriterion, TrialRecord};
use recover_core::problem::{problem_dimensions, sample_sensing_matrix, sample_sparse_vector};
use recover_core::seed::derive_seed;
use recover_core::{recover, Algorithm, AlgorithmConfig, DistributionSpec, Error, ProblemInstance, Termination};

use crate::config::PhiPolicy;

pub const TAG_IMPLICATION: &str = "criterion_implication";
pub const TAG_PANIC: &str = "panic";

/// Phase-plane cell for one algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub algorithm: Algorithm,
    pub distribution: DistributionSpec,
    pub n: usize,
    pub delta: f64,
    pub rho: f64,
    pub delta_index: usize,
    pub rho_index: usize,
}

/// Everything besides the cell that determines a trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialContext {
    pub master_seed: u64,
    pub phi_policy: PhiPolicy,
    pub algorithms: AlgorithmConfig,
    pub epsilon_x: f64,
    pub record_timing: bool,
}

impl TrialContext {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            phi_policy: PhiPolicy::PerCell,
            algorithms: AlgorithmConfig::default(),
            epsilon_x: 1e-2,
            record_timing: true,
        }
    }
}

/// Seed shared by every algorithm at `(distribution, delta, rho)`, so that
/// all algorithms see the same problems.
pub fn cell_seed(master: u64, cell: &CellSpec) -> u64 {
    derive_seed(
        master,
        cell.distribution.id(),
        &[cell.n as u64, cell.delta.to_bits(), cell.rho.to_bits()],
    )
}

pub fn trial_seed(master: u64, cell: &CellSpec, trial: usize) -> u64 {
    derive_seed(cell_seed(master, cell), "trial", &[trial as u64])
}

/// The problem instance of `trial` in `cell`.
pub fn build_trial_problem(ctx: &TrialContext, cell: &CellSpec, trial: usize) -> recover_core::Result<ProblemInstance> {
    let (m, s) = problem_dimensions(cell.n, cell.delta, cell.rho)?;
    let seed = trial_seed(ctx.master_seed, cell, trial);
    let phi_seed = match ctx.phi_policy {
        PhiPolicy::PerCell => derive_seed(cell_seed(ctx.master_seed, cell), "phi", &[]),
        PhiPolicy::PerTrial => derive_seed(seed, "phi", &[]),
    };
    let phi = sample_sensing_matrix(m, cell.n, phi_seed)?;
    let x = sample_sparse_vector(cell.n, s, cell.distribution, derive_seed(seed, "x", &[]))?;
    ProblemInstance::new(phi, x)
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::RankDeficient { .. } => "rank_deficient",
        Error::InvalidDimensions(_) => "invalid_dimensions",
        Error::InvalidSparsity { .. } => "invalid_sparsity",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::NonFinite => "non_finite",
        Error::ZeroTruth => "zero_truth",
        Error::EmptyCell => "empty_cell",
        Error::GridMismatch => "grid_mismatch",
    }
}

/// Flags for solutions that came back but did not finish cleanly.
fn termination_tag(t: Termination) -> &'static str {
    match t {
        Termination::Stalled => "stalled",
        Termination::Diverged => "diverged",
        _ => "",
    }
}

/// Tags that mark a trial as failed rather than merely flagged.
pub fn is_failure_tag(tag: &str) -> bool {
    !tag.is_empty() && !matches!(tag, "stalled" | "diverged")
}

struct Outcome {
    success_l2: bool,
    success_support: bool,
    residual_norm: f64,
    iterations: usize,
    tag: String,
}

fn evaluate(ctx: &TrialContext, cell: &CellSpec, trial: usize, seed: u64) -> Result<Outcome, Error> {
    let p = build_trial_problem(ctx, cell, trial)?;
    let sol = recover(cell.algorithm, &p, &ctx.algorithms, derive_seed(seed, "algorithm", &[]))?;
    let xd = debias(&sol.x_hat, &p.phi, &p.u);
    let crit = RecoveryCriterion {
        kind: CriterionKind::RelativeL2,
        epsilon_x: ctx.epsilon_x,
    };
    let success_l2 = check_l2(&p.x, &xd, crit)?;
    let success_support = check_support(&p.x, &xd);
    let tag = if success_support && !success_l2 {
        TAG_IMPLICATION
    } else {
        termination_tag(sol.termination)
    };
    Ok(Outcome {
        success_l2,
        success_support,
        residual_norm: sol.residual_norm,
        iterations: sol.iterations,
        tag: tag.to_string(),
    })
}

/// Run one trial. Errors and panics are recorded in the error tag.
pub fn run_trial(ctx: &TrialContext, cell: &CellSpec, trial: usize) -> TrialRecord {
    let seed = trial_seed(ctx.master_seed, cell, trial);
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| evaluate(ctx, cell, trial, seed)));
    let wall = if ctx.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let outcome = match outcome {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome {
            success_l2: false,
            success_support: false,
            residual_norm: f64::NAN,
            iterations: 0,
            tag: format!("error:{}", error_tag(&e)),
        },
        Err(_) => Outcome {
            success_l2: false,
            success_support: false,
            residual_norm: f64::NAN,
            iterations: 0,
            tag: TAG_PANIC.to_string(),
        },
    };
    TrialRecord {
        algorithm: cell.algorithm.id().to_string(),
        distribution: cell.distribution.id().to_string(),
        delta: cell.delta,
        rho: cell.rho,
        delta_index: cell.delta_index,
        rho_index: cell.rho_index,
        trial,
        seed,
        success_l2: outcome.success_l2,
        success_support: outcome.success_support,
        residual_norm: outcome.residual_norm,
        iterations: outcome.iterations,
        wall_time_s: wall,
        error_tag: outcome.tag,
    }
}
