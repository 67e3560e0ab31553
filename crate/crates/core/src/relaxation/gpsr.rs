use alloc::vec::Vec;

use crate::numerics::vector::{dot, norm1, norm2_sq, norm_inf};
use crate::problem::ProblemInstance;
use crate::thresholding::DivergenceGuard;
use crate::solution::{measurement_residual, RecoverySolution, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsrConfig {
    /// `lambda = lambda_factor * ||phi^T u||_inf`
    pub lambda_factor: f64,
    pub max_iterations: usize,
    /// Stop when the relative objective change drops below this.
    pub objective_tol: f64,
    /// Sufficient-decrease constant.
    pub mu: f64,
    /// Backtracking factor.
    pub beta: f64,
    pub divergence_factor: f64,
}

impl Default for GpsrConfig {
    fn default() -> Self {
        Self {
            lambda_factor: 0.005,
            max_iterations: 300,
            objective_tol: 1e-8,
            mu: 0.1,
            beta: 0.5,
            divergence_factor: 1e6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GpsrTrace {
    pub lambda: f64,
    /// Objective at the start and after every accepted step.
    pub objective: Vec<f64>,
}

/// `0.5 ||u - phi x||^2 + lambda ||x||_1`
pub fn gpsr_objective(p: &ProblemInstance, x: &[f64], lambda: f64) -> f64 {
    0.5 * norm2_sq(&measurement_residual(p, x)) + lambda * norm1(x)
}

/// Gradient projection on the nonnegative split `x = a - b`, steepest
/// descent with an initial step from the projected gradient and backtracking.
pub fn gpsr_solve(p: &ProblemInstance, cfg: &GpsrConfig) -> (RecoverySolution, GpsrTrace) {
    let n = p.n();
    let atu = p.phi.tr_mul_vec(&p.u).expect("measurement length");
    let lambda = cfg.lambda_factor * norm_inf(&atu);
    let mut trace = GpsrTrace { lambda, objective: Vec::new() };
    if lambda == 0.0 {
        return (RecoverySolution::zero(p), trace);
    }
    let mut guard = DivergenceGuard::new(p, cfg.divergence_factor);
    let mut a = alloc::vec![0.0; n];
    let mut b = alloc::vec![0.0; n];
    let mut x = alloc::vec![0.0; n];
    let mut r = p.u.clone();
    let mut f = 0.5 * norm2_sq(&r);
    trace.objective.push(f);
    let mut history = alloc::vec![libm::sqrt(2.0 * f)];
    let mut g = alloc::vec![0.0; n];
    let mut img = alloc::vec![0.0; p.m()];
    let mut iterations = 0;
    let termination = loop {
        if iterations >= cfg.max_iterations {
            break Termination::IterationCap;
        }
        p.phi.tr_mul_vec_into(&r, &mut g);
        // Gradient of the split objective: (lambda - g, lambda + g).
        let grad_a: Vec<f64> = g.iter().map(|gi| lambda - gi).collect();
        let grad_b: Vec<f64> = g.iter().map(|gi| lambda + gi).collect();
        let pa: Vec<f64> = (0..n).map(|i| if a[i] > 0.0 || grad_a[i] < 0.0 { grad_a[i] } else { 0.0 }).collect();
        let pb: Vec<f64> = (0..n).map(|i| if b[i] > 0.0 || grad_b[i] < 0.0 { grad_b[i] } else { 0.0 }).collect();
        let num = dot(&pa, &pa) + dot(&pb, &pb);
        if num == 0.0 {
            break Termination::Converged;
        }
        let diff: Vec<f64> = pa.iter().zip(&pb).map(|(u, v)| u - v).collect();
        p.phi.mul_vec_into(&diff, &mut img);
        let den = dot(&img, &img);
        let mut alpha = if den > 0.0 { (num / den).clamp(1e-30, 1e30) } else { 1e30 };
        let mut accepted = None;
        for _ in 0..60 {
            let na: Vec<f64> = (0..n).map(|i| (a[i] - alpha * grad_a[i]).max(0.0)).collect();
            let nb: Vec<f64> = (0..n).map(|i| (b[i] - alpha * grad_b[i]).max(0.0)).collect();
            let nx: Vec<f64> = na.iter().zip(&nb).map(|(u, v)| u - v).collect();
            let nr = measurement_residual(p, &nx);
            let nf = 0.5 * norm2_sq(&nr) + lambda * (na.iter().sum::<f64>() + nb.iter().sum::<f64>());
            let decrease: f64 = (0..n).map(|i| grad_a[i] * (a[i] - na[i]) + grad_b[i] * (b[i] - nb[i])).sum();
            if nf <= f - cfg.mu * decrease {
                accepted = Some((na, nb, nx, nr, nf));
                break;
            }
            alpha *= cfg.beta;
        }
        let Some((na, nb, nx, nr, nf)) = accepted else {
            break Termination::Stalled;
        };
        iterations += 1;
        let rel = (f - nf).abs() / f.max(f64::MIN_POSITIVE);
        a = na;
        b = nb;
        x = nx;
        r = nr;
        f = nf;
        trace.objective.push(f);
        history.push(libm::sqrt(norm2_sq(&r)));
        if guard.diverged(&x) {
            break Termination::Diverged;
        }
        if rel < cfg.objective_tol {
            break Termination::Converged;
        }
    };
    (RecoverySolution::from_estimate(p, x, iterations, termination, history), trace)
}

/// GPSR-Basic on the Lagrangian ℓ1 problem.
pub fn gpsr_recover(p: &ProblemInstance, cfg: &GpsrConfig) -> RecoverySolution {
    gpsr_solve(p, cfg).0
}
