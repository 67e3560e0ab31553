//! Primal-dual interior point for weighted ℓ1 minimization
//! `min sum_n w_n |x_n|  s.t.  phi x = u`, posed as the split LP
//! `min w^T (a + b)  s.t.  phi (a - b) = u,  a, b >= 0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::vector::{dot, norm2};
use crate::numerics::{Cholesky, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSolverConfig {
    /// Relative duality gap `|w^T z - u^T nu| / (1 + |w^T z|)`.
    pub duality_gap_tol: f64,
    /// Primal and dual infeasibility relative to `||u||` and `||w||`.
    pub feasibility_tol: f64,
    pub max_ipm_iterations: usize,
    pub step_fraction: f64,
}

impl Default for LpSolverConfig {
    fn default() -> Self {
        Self {
            duality_gap_tol: 1e-9,
            feasibility_tol: 1e-9,
            max_ipm_iterations: 100,
            step_fraction: 0.99,
        }
    }
}

impl LpSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duality_gap_tol > 0.0) || !(self.feasibility_tol > 0.0) || self.max_ipm_iterations == 0 {
            return Err(Error::InvalidParameter("solver tolerances must be positive"));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::InvalidParameter("step_fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Solution {
    pub x: Vec<f64>,
    /// Dual multiplier `nu` with `|phi^T nu|_n <= w_n` up to dual infeasibility.
    pub dual: Vec<f64>,
    /// Relative duality gap at exit.
    pub gap: f64,
    pub iterations: usize,
    /// False when the iteration cap or a singular Schur complement stopped the solver.
    pub converged: bool,
}

/// Iterations without halving the merit before the solver gives up.
const STALL_WINDOW: usize = 8;

struct Best {
    merit: f64,
    x: Vec<f64>,
    nu: Vec<f64>,
    gap: f64,
}

struct Iterate {
    a: Vec<f64>,
    b: Vec<f64>,
    sa: Vec<f64>,
    sb: Vec<f64>,
    nu: Vec<f64>,
}

struct Direction {
    a: Vec<f64>,
    b: Vec<f64>,
    sa: Vec<f64>,
    sb: Vec<f64>,
    nu: Vec<f64>,
}

fn factor_regularized(mut m: Vec<f64>, k: usize) -> Option<Cholesky> {
    let scale = (0..k).map(|i| m[i * k + i]).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut ridge = 0.0;
    for _ in 0..6 {
        if let Ok(c) = Cholesky::factor(&m, k) {
            return Some(c);
        }
        let next = if ridge == 0.0 { 1e-13 * scale } else { ridge * 100.0 };
        for i in 0..k {
            m[i * k + i] += next - ridge;
        }
        ridge = next;
    }
    None
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

/// Solves the Newton system given the complementarity right-hand sides
/// `rc_a`, `rc_b` (targets for `S dz + Z ds`).
#[allow(clippy::too_many_arguments)]
fn newton(
    phi: &DenseMatrix,
    chol: &Cholesky,
    it: &Iterate,
    rp: &[f64],
    rda: &[f64],
    rdb: &[f64],
    rc_a: &[f64],
    rc_b: &[f64],
) -> Direction {
    let n = phi.cols();
    let mut va = alloc::vec![0.0; n];
    let mut vb = alloc::vec![0.0; n];
    for i in 0..n {
        va[i] = (rc_a[i] - it.a[i] * rda[i]) / it.sa[i];
        vb[i] = (rc_b[i] - it.b[i] * rdb[i]) / it.sb[i];
    }
    let diff: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x - y).collect();
    let av = phi.mul_vec(&diff).expect("ambient length");
    let mut dnu: Vec<f64> = rp.iter().zip(&av).map(|(r, a)| r - a).collect();
    chol.solve_in_place(&mut dnu);
    let g = phi.tr_mul_vec(&dnu).expect("measurement length");
    let mut d = Direction {
        a: va,
        b: vb,
        sa: alloc::vec![0.0; n],
        sb: alloc::vec![0.0; n],
        nu: dnu,
    };
    for i in 0..n {
        d.a[i] += it.a[i] / it.sa[i] * g[i];
        d.b[i] -= it.b[i] / it.sb[i] * g[i];
        d.sa[i] = rda[i] - g[i];
        d.sb[i] = rdb[i] + g[i];
    }
    d
}

/// Minimize `sum w_n |x_n|` subject to `phi x = u` (weights positive).
pub fn weighted_l1_min(phi: &DenseMatrix, u: &[f64], w: &[f64], cfg: &LpSolverConfig) -> Result<L1Solution> {
    let (m, n) = (phi.rows(), phi.cols());
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: u.len() });
    }
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("weights must be positive and finite"));
    }
    cfg.validate()?;
    if u.iter().all(|v| *v == 0.0) {
        return Ok(L1Solution {
            x: alloc::vec![0.0; n],
            dual: alloc::vec![0.0; m],
            gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    // Mehrotra's starting point: least-norm primal, zero dual multiplier.
    let gram = phi.weighted_gram(&alloc::vec![1.0; n]);
    let chol0 = Cholesky::factor(&gram, m).map_err(|_| Error::RankDeficient { rank: m.saturating_sub(1), required: m })?;
    let mut y = u.to_vec();
    chol0.solve_in_place(&mut y);
    let xmn = phi.tr_mul_vec(&y)?;
    let mut a: Vec<f64> = xmn.iter().map(|v| v / 2.0).collect();
    let mut b: Vec<f64> = xmn.iter().map(|v| -v / 2.0).collect();
    let mut sa = w.to_vec();
    let mut sb = w.to_vec();
    let zmin = a.iter().chain(&b).copied().fold(f64::INFINITY, f64::min);
    let shift = (-1.5 * zmin).max(0.0);
    a.iter_mut().chain(b.iter_mut()).for_each(|v| *v += shift);
    let zs = dot(&a, &sa) + dot(&b, &sb);
    let sum_s: f64 = sa.iter().chain(&sb).sum();
    let sum_z: f64 = a.iter().chain(&b).sum();
    let (dz, ds) = (0.5 * zs / sum_s, 0.5 * zs / sum_z);
    a.iter_mut().chain(b.iter_mut()).for_each(|v| *v += dz);
    sa.iter_mut().chain(sb.iter_mut()).for_each(|v| *v += ds);
    let mut it = Iterate { a, b, sa, sb, nu: alloc::vec![0.0; m] };

    let un = norm2(u);
    let wn = libm::sqrt(2.0) * norm2(w);
    let big_n = 2.0 * n as f64;
    let mut rp = alloc::vec![0.0; m];
    let mut rda = alloc::vec![0.0; n];
    let mut rdb = alloc::vec![0.0; n];
    let mut xs = alloc::vec![0.0; n];
    let mut best = Best {
        merit: f64::INFINITY,
        x: Vec::new(),
        nu: Vec::new(),
        gap: f64::INFINITY,
    };
    let mut since_best = 0;
    let mut iterations = 0;
    loop {
        for i in 0..n {
            xs[i] = it.a[i] - it.b[i];
        }
        phi.mul_vec_into(&xs, &mut rp);
        rp.iter_mut().zip(u).for_each(|(r, ui)| *r = ui - *r);
        let g = phi.tr_mul_vec(&it.nu)?;
        for i in 0..n {
            rda[i] = w[i] - g[i] - it.sa[i];
            rdb[i] = w[i] + g[i] - it.sb[i];
        }
        let primal = dot(w, &it.a) + dot(w, &it.b);
        let dual = dot(u, &it.nu);
        let gap = (primal - dual).abs() / (1.0 + primal.abs());
        let pinf = norm2(&rp) / un;
        let dinf = libm::sqrt(dot(&rda, &rda) + dot(&rdb, &rdb)) / wn;
        let merit = (gap / cfg.duality_gap_tol).max(pinf / cfg.feasibility_tol).max(dinf / cfg.feasibility_tol);
        if merit < best.merit {
            // Near the optimum the Schur complement is badly conditioned and
            // later steps can lose accuracy, so the best iterate is kept.
            if merit < 0.5 * best.merit {
                since_best = 0;
            }
            best = Best {
                merit,
                x: xs.clone(),
                nu: it.nu.clone(),
                gap,
            };
        } else {
            since_best += 1;
        }
        if merit <= 1.0 || iterations >= cfg.max_ipm_iterations || since_best >= STALL_WINDOW {
            break;
        }
        let d: Vec<f64> = (0..n).map(|i| it.a[i] / it.sa[i] + it.b[i] / it.sb[i]).collect();
        let Some(chol) = factor_regularized(phi.weighted_gram(&d), m) else {
            break;
        };
        let mu = (dot(&it.a, &it.sa) + dot(&it.b, &it.sb)) / big_n;

        // Predictor.
        let rca: Vec<f64> = it.a.iter().zip(&it.sa).map(|(z, s)| -z * s).collect();
        let rcb: Vec<f64> = it.b.iter().zip(&it.sb).map(|(z, s)| -z * s).collect();
        let aff = newton(phi, &chol, &it, &rp, &rda, &rdb, &rca, &rcb);
        let ap = max_step(&it.a, &aff.a).min(max_step(&it.b, &aff.b)).min(1.0);
        let ad = max_step(&it.sa, &aff.sa).min(max_step(&it.sb, &aff.sb)).min(1.0);
        let mut mu_aff = 0.0;
        for i in 0..n {
            mu_aff += (it.a[i] + ap * aff.a[i]) * (it.sa[i] + ad * aff.sa[i]);
            mu_aff += (it.b[i] + ap * aff.b[i]) * (it.sb[i] + ad * aff.sb[i]);
        }
        mu_aff /= big_n;
        let sigma = libm::pow(mu_aff / mu, 3.0).min(1.0);

        // Corrector.
        let rca: Vec<f64> = (0..n).map(|i| rca[i] - aff.a[i] * aff.sa[i] + sigma * mu).collect();
        let rcb: Vec<f64> = (0..n).map(|i| rcb[i] - aff.b[i] * aff.sb[i] + sigma * mu).collect();
        let dir = newton(phi, &chol, &it, &rp, &rda, &rdb, &rca, &rcb);
        let ap = (cfg.step_fraction * max_step(&it.a, &dir.a).min(max_step(&it.b, &dir.b))).min(1.0);
        let ad = (cfg.step_fraction * max_step(&it.sa, &dir.sa).min(max_step(&it.sb, &dir.sb))).min(1.0);
        for i in 0..n {
            it.a[i] += ap * dir.a[i];
            it.b[i] += ap * dir.b[i];
            it.sa[i] += ad * dir.sa[i];
            it.sb[i] += ad * dir.sb[i];
        }
        for (v, dv) in it.nu.iter_mut().zip(&dir.nu) {
            *v += ad * dv;
        }
        iterations += 1;
        if it.a.iter().chain(&it.b).chain(&it.nu).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(L1Solution {
        x: best.x,
        dual: best.nu,
        gap: best.gap,
        iterations,
        converged: best.merit <= 1.0,
    })
}
