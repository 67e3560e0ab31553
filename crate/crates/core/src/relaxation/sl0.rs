use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::vector::{norm2, norm_inf};
use crate::numerics::RowSpaceProjector;
use crate::problem::ProblemInstance;
use crate::solution::{measurement_residual_norm, RecoverySolution, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl0Config {
    pub sigma_decay: f64,
    pub sigma_min: f64,
    pub inner_iterations: usize,
    pub step_scale: f64,
}

impl Default for Sl0Config {
    fn default() -> Self {
        Self {
            sigma_decay: 0.95,
            sigma_min: 4e-5,
            inner_iterations: 3,
            step_scale: 2.0,
        }
    }
}

impl Sl0Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_decay > 0.0 && self.sigma_decay < 1.0) || !(self.sigma_min > 0.0) {
            return Err(Error::InvalidParameter("sigma ladder needs 0 < d < 1 and sigma_min > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sl0Trace {
    pub ladder_len: usize,
    /// Largest `||phi x - u|| / ||u||` seen after any reprojection.
    pub max_feasibility: f64,
}

/// `J(x; sigma) = sum_n exp(-x_n^2 / (2 sigma^2))`
pub fn smoothed_l0(x: &[f64], sigma: f64) -> f64 {
    let c = -0.5 / (sigma * sigma);
    x.iter().map(|v| libm::exp(c * v * v)).sum()
}

/// `sigma_0, sigma_0 d, ...` with `ceil(log(sigma_min / sigma_0) / log d) + 1` entries.
pub fn sigma_ladder(sigma0: f64, cfg: &Sl0Config) -> Vec<f64> {
    let len = if sigma0 <= cfg.sigma_min {
        1
    } else {
        libm::ceil(libm::log(cfg.sigma_min / sigma0) / libm::log(cfg.sigma_decay)) as usize + 1
    };
    let mut out = Vec::with_capacity(len);
    let mut s = sigma0;
    for _ in 0..len {
        out.push(s);
        s *= cfg.sigma_decay;
    }
    out
}

/// SL0 that also measures feasibility after every reprojection.
pub fn sl0_solve(p: &ProblemInstance, cfg: &Sl0Config) -> Result<(RecoverySolution, Sl0Trace)> {
    sl0_run(p, cfg, true)
}

fn sl0_run(p: &ProblemInstance, cfg: &Sl0Config, track: bool) -> Result<(RecoverySolution, Sl0Trace)> {
    cfg.validate()?;
    let mut trace = Sl0Trace::default();
    let proj = RowSpaceProjector::new(&p.phi)?;
    let coords = proj.coordinates(&p.u);
    let mut x = proj.min_norm_solution(&p.u);
    let sigma0 = 2.0 * norm_inf(&x);
    if sigma0 == 0.0 {
        return Ok((RecoverySolution::zero(p), trace));
    }
    let un = p.measurement_norm();
    let ladder = sigma_ladder(sigma0, cfg);
    trace.ladder_len = ladder.len();
    let mut history = alloc::vec![measurement_residual_norm(p, &x)];
    let mut fit = alloc::vec![0.0; p.m()];
    let mut iterations = 0;
    for &sigma in &ladder {
        let c = -0.5 / (sigma * sigma);
        let mut feas = 0.0;
        for _ in 0..cfg.inner_iterations {
            // x + mu sigma^2 grad J = x - mu x exp(-x^2 / 2 sigma^2)
            for v in x.iter_mut() {
                *v -= cfg.step_scale * *v * libm::exp(c * *v * *v);
            }
            proj.project_in_place(&mut x, &coords);
            iterations += 1;
            if !track {
                continue;
            }
            p.phi.mul_vec_into(&x, &mut fit);
            feas = norm2(&fit.iter().zip(&p.u).map(|(a, b)| a - b).collect::<Vec<_>>()) / un;
            trace.max_feasibility = trace.max_feasibility.max(feas);
        }
        if !track {
            feas = measurement_residual_norm(p, &x) / un;
        }
        history.push(feas * un);
    }
    Ok((
        RecoverySolution::from_estimate(p, x, iterations, Termination::Converged, history),
        trace,
    ))
}

/// Smoothed ℓ0 minimization by steepest ascent and reprojection.
pub fn sl0_recover(p: &ProblemInstance, cfg: &Sl0Config) -> Result<RecoverySolution> {
    sl0_run(p, cfg, false).map(|(s, _)| s)
}
