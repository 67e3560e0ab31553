use alloc::vec::Vec;

use crate::numerics::vector::{norm2, sub, support};
use crate::problem::ProblemInstance;

/// Why a recovery routine stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Residual fell below the relative tolerance.
    ResidualTol,
    /// Support grew past its budget.
    SupportBudget,
    /// Iteration or stage cap reached.
    IterationCap,
    /// Residual grew; the previous iterate was returned.
    ResidualIncrease,
    /// No further progress possible (empty selection, dependent columns,
    /// stationary iterate, or the solver's own convergence test).
    Converged,
    /// Iterates blew up; the best iterate so far was returned.
    Diverged,
    /// The interior-point solver hit its iteration cap before reaching the
    /// duality-gap tolerance; the best iterate was returned.
    Stalled,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ResidualTol => "residual_tol",
            Self::SupportBudget => "support_budget",
            Self::IterationCap => "iteration_cap",
            Self::ResidualIncrease => "residual_increase",
            Self::Converged => "converged",
            Self::Diverged => "diverged",
            Self::Stalled => "stalled",
        }
    }
}

/// Output of a recovery algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoverySolution {
    pub x_hat: Vec<f64>,
    pub support: Vec<usize>,
    /// `||u - phi x_hat||_2`
    pub residual_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Residual norm after each iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
}

impl RecoverySolution {
    pub fn from_estimate(
        p: &ProblemInstance,
        x_hat: Vec<f64>,
        iterations: usize,
        termination: Termination,
        residual_history: Vec<f64>,
    ) -> Self {
        let residual_norm = measurement_residual_norm(p, &x_hat);
        let support = support(&x_hat);
        Self {
            x_hat,
            support,
            residual_norm,
            iterations,
            termination,
            residual_history,
        }
    }

    /// The all-zero estimate, returned when `u = 0`.
    pub fn zero(p: &ProblemInstance) -> Self {
        let r = p.measurement_norm();
        Self::from_estimate(
            p,
            alloc::vec![0.0; p.n()],
            0,
            Termination::ResidualTol,
            alloc::vec![r],
        )
    }
}

/// `||u - phi x||_2`
pub fn measurement_residual_norm(p: &ProblemInstance, x: &[f64]) -> f64 {
    let fit = p.phi.mul_vec(x).expect("estimate has ambient length");
    norm2(&sub(&p.u, &fit))
}

/// `u - phi x`
pub fn measurement_residual(p: &ProblemInstance, x: &[f64]) -> Vec<f64> {
    let fit = p.phi.mul_vec(x).expect("estimate has ambient length");
    sub(&p.u, &fit)
}
