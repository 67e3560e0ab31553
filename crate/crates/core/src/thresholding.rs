//! Iterative thresholding: IHT, IST, CoSaMP, SP, two-stage thresholding,
//! approximate message passing, and ALPS with 1-memory.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::special::normal_quantile;
use crate::numerics::vector::{dot, keep_top_k, norm2, norm2_sq, scatter, support, top_k_indices};
use crate::numerics::{least_squares_on_support, row_space_project};
use crate::problem::ProblemInstance;
use crate::solution::{measurement_residual, RecoverySolution, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFunction {
    pub kind: ThresholdKind,
    pub tau: f64,
}

impl ThresholdFunction {
    pub fn hard(tau: f64) -> Self {
        Self { kind: ThresholdKind::Hard, tau }
    }

    pub fn soft(tau: f64) -> Self {
        Self { kind: ThresholdKind::Soft, tau }
    }

    #[inline]
    pub fn apply_scalar(&self, v: f64) -> f64 {
        if v.abs() > self.tau {
            match self.kind {
                ThresholdKind::Hard => v,
                ThresholdKind::Soft => libm::copysign(v.abs() - self.tau, v),
            }
        } else {
            0.0
        }
    }
}

/// Element-wise thresholding.
pub fn apply_threshold(x: &[f64], t: ThresholdFunction) -> Vec<f64> {
    x.iter().map(|&v| t.apply_scalar(v)).collect()
}

/// Threshold `q * sigma` where `sigma = median|g| / 0.6745` estimates the
/// spread of the correlation vector and `q` is the two-sided standard
/// normal quantile for a false-alarm rate `far_per_delta * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalseAlarmSchedule {
    pub far_per_delta: f64,
}

impl Default for FalseAlarmSchedule {
    fn default() -> Self {
        Self { far_per_delta: 0.02 }
    }
}

impl FalseAlarmSchedule {
    pub fn false_alarm_rate(&self, delta: f64) -> f64 {
        (self.far_per_delta * delta).clamp(f64::MIN_POSITIVE, 1.0)
    }

    pub fn threshold(&self, g: &[f64], delta: f64) -> f64 {
        let q = normal_quantile(1.0 - self.false_alarm_rate(delta) / 2.0);
        q * median_abs(g) / 0.6745
    }
}

fn median_abs(g: &[f64]) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    let mut a: Vec<f64> = g.iter().map(|v| v.abs()).collect();
    let mid = a.len() / 2;
    let (_, m, _) = a.select_nth_unstable_by(mid, |x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    *m
}

/// `k`-th largest magnitude (1-based), 0 if `k` exceeds the length.
pub fn kth_largest_magnitude(y: &[f64], k: usize) -> f64 {
    if k == 0 || k > y.len() {
        return 0.0;
    }
    let mut a: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let (_, v, _) = a.select_nth_unstable_by(k - 1, |x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    *v
}

/// Source of the AMP threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmpThreshold {
    /// m-th largest magnitude of the previous pseudo-data `x_{k-1} + phi^T r_{k-1}`.
    CandidateRank,
    /// m-th largest magnitude of the previous iterate `x_{k-1}`; falls back
    /// to the pseudo-data while the iterate has fewer than m nonzeros.
    IterateRank,
}

/// How two-stage thresholding sizes its supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TstSparsity {
    /// `floor((0.044417 delta^2 + 0.34142 delta + 0.14844) m)`
    Recommended,
    /// The true sparsity of the instance.
    Known,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TstParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub sparsity: TstSparsity,
}

impl Default for TstParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            kappa: 0.6,
            sparsity: TstSparsity::Recommended,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdingConfig {
    pub max_iterations: usize,
    /// Relative residual stopping tolerance.
    pub residual_tol: f64,
    pub iht_kappa: f64,
    pub ist_kappa: f64,
    pub iht_schedule: FalseAlarmSchedule,
    pub ist_schedule: FalseAlarmSchedule,
    pub tst: TstParams,
    pub amp_threshold: AmpThreshold,
    /// Magnitude floor for the CoSaMP/SP selections.
    pub numeric_floor: f64,
    /// Divergence is declared when `||x|| > divergence_factor * ||phi^+ u||`.
    pub divergence_factor: f64,
}

impl Default for ThresholdingConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            residual_tol: 1e-5,
            iht_kappa: 0.65,
            ist_kappa: 0.6,
            iht_schedule: FalseAlarmSchedule::default(),
            ist_schedule: FalseAlarmSchedule::default(),
            tst: TstParams::default(),
            amp_threshold: AmpThreshold::CandidateRank,
            numeric_floor: 1e-12,
            divergence_factor: 1e6,
        }
    }
}

impl ThresholdingConfig {
    pub fn validate(&self) -> Result<()> {
        let kappa_ok = |k: f64| k > 0.0 && k < 1.0;
        if !kappa_ok(self.iht_kappa) || !kappa_ok(self.ist_kappa) || !(self.tst.kappa > 0.0 && self.tst.kappa <= 1.0) {
            return Err(Error::InvalidParameter("relaxation must lie in (0, 1)"));
        }
        if self.max_iterations == 0 || !(self.numeric_floor > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("thresholding limits must be positive"));
        }
        Ok(())
    }
}

/// Recommended two-stage-thresholding sparsity estimate for `m` measurements at
/// indeterminacy `delta`.
pub fn tst_sparsity_estimate(delta: f64, m: usize) -> usize {
    let frac = 0.044417 * delta * delta + 0.34142 * delta + 0.14844;
    libm::floor(frac * m as f64) as usize
}

/// Tracks `||x||` against `factor * ||phi^+ u||`. The exact minimum-norm
/// solution is only computed once `||x||` passes the cheap lower bound
/// `factor * ||u|| / ||phi||_F`.
pub(crate) struct DivergenceGuard<'a> {
    p: &'a ProblemInstance,
    factor: f64,
    cheap: f64,
    exact: Option<f64>,
}

impl<'a> DivergenceGuard<'a> {
    pub(crate) fn new(p: &'a ProblemInstance, factor: f64) -> Self {
        let frob = libm::sqrt(norm2_sq(p.phi.as_slice()));
        Self {
            p,
            factor,
            cheap: factor * p.measurement_norm() / frob,
            exact: None,
        }
    }

    pub(crate) fn diverged(&mut self, x: &[f64]) -> bool {
        let nx = norm2(x);
        if !nx.is_finite() {
            return true;
        }
        if nx <= self.cheap {
            return false;
        }
        let limit = *self.exact.get_or_insert_with(|| {
            let mn = row_space_project(&self.p.phi, &self.p.u).map_or(0.0, |v| norm2(&v));
            self.factor * mn
        });
        nx > limit
    }
}

/// Best iterate (smallest residual) seen so far.
struct Best {
    x: Vec<f64>,
    residual: f64,
}

impl Best {
    fn offer(&mut self, x: &[f64], residual: f64) {
        if residual < self.residual {
            self.residual = residual;
            self.x.clear();
            self.x.extend_from_slice(x);
        }
    }
}

fn iterative_threshold(
    p: &ProblemInstance,
    cfg: &ThresholdingConfig,
    kind: ThresholdKind,
    kappa: f64,
    schedule: FalseAlarmSchedule,
) -> RecoverySolution {
    let un = p.measurement_norm();
    if un == 0.0 {
        return RecoverySolution::zero(p);
    }
    let tol = cfg.residual_tol * un;
    let delta = p.delta();
    let mut guard = DivergenceGuard::new(p, cfg.divergence_factor);
    let mut x = alloc::vec![0.0; p.n()];
    let mut r = p.u.clone();
    let mut rn = un;
    let mut history = alloc::vec![rn];
    let mut best = Best { x: x.clone(), residual: rn };
    let mut g = alloc::vec![0.0; p.n()];
    let mut fit = alloc::vec![0.0; p.m()];
    let mut iterations = 0;
    let termination = loop {
        if rn <= tol {
            break Termination::ResidualTol;
        }
        if iterations >= cfg.max_iterations {
            break Termination::IterationCap;
        }
        p.phi.tr_mul_vec_into(&r, &mut g);
        g.iter_mut().for_each(|v| *v *= kappa);
        let t = ThresholdFunction {
            kind,
            tau: schedule.threshold(&g, delta),
        };
        let next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| t.apply_scalar(xi + gi)).collect();
        iterations += 1;
        if guard.diverged(&next) {
            x = best.x.clone();
            break Termination::Diverged;
        }
        let stationary = next == x;
        x = next;
        p.phi.mul_vec_into(&x, &mut fit);
        for ((ri, ui), fi) in r.iter_mut().zip(&p.u).zip(&fit) {
            *ri = ui - fi;
        }
        rn = norm2(&r);
        history.push(rn);
        best.offer(&x, rn);
        if stationary {
            break Termination::Converged;
        }
    };
    RecoverySolution::from_estimate(p, x, iterations, termination, history)
}

/// Recommended iterative hard thresholding.
pub fn iht_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    iterative_threshold(p, cfg, ThresholdKind::Hard, cfg.iht_kappa, cfg.iht_schedule)
}

/// Recommended iterative soft thresholding.
pub fn ist_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    iterative_threshold(p, cfg, ThresholdKind::Soft, cfg.ist_kappa, cfg.ist_schedule)
}

/// CoSaMP first-stage set: the `2s` largest correlations above `floor`.
pub fn cosamp_candidates(g: &[f64], s: usize, floor: f64) -> Vec<usize> {
    top_k_indices(g, 2 * s, floor)
}

/// Two-stage-thresholding first-stage set: the `count` largest entries of
/// `x + kappa g`.
pub fn tst_candidates(x: &[f64], g: &[f64], kappa: f64, count: usize) -> Vec<usize> {
    let y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + kappa * b).collect();
    top_k_indices(&y, count, 0.0)
}

/// One two-stage refinement: least squares on `S(x) ∪ candidates`, keep the
/// `keep` largest coefficients above `floor`, and re-fit on that support.
pub fn two_stage_refine(p: &ProblemInstance, x: &[f64], candidates: &[usize], keep: usize, floor: f64) -> Vec<f64> {
    let mut union = support(x);
    union.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut in_union = alloc::vec![false; p.n()];
    union.iter().for_each(|&i| in_union[i] = true);
    for &j in candidates {
        if !in_union[j] {
            in_union[j] = true;
            union.push(j);
        }
    }
    let (kept, coef) = least_squares_on_support(&p.phi, &p.u, &union);
    let b = scatter(p.n(), &kept, &coef);
    let omega = top_k_indices(&b, keep, floor);
    let (kept, coef) = least_squares_on_support(&p.phi, &p.u, &omega);
    scatter(p.n(), &kept, &coef)
}

fn two_stage<F>(p: &ProblemInstance, cfg: &ThresholdingConfig, keep: usize, floor: f64, mut first: F) -> RecoverySolution
where
    F: FnMut(&[f64], &[f64]) -> Vec<usize>,
{
    let un = p.measurement_norm();
    if un == 0.0 || keep == 0 {
        return RecoverySolution::zero(p);
    }
    let tol = cfg.residual_tol * un;
    let mut x = alloc::vec![0.0; p.n()];
    let mut r = p.u.clone();
    let mut rn = un;
    let mut history = alloc::vec![rn];
    let mut g = alloc::vec![0.0; p.n()];
    let mut iterations = 0;
    let termination = loop {
        if rn <= tol {
            break Termination::ResidualTol;
        }
        if iterations >= cfg.max_iterations {
            break Termination::IterationCap;
        }
        p.phi.tr_mul_vec_into(&r, &mut g);
        let cand = first(&x, &g);
        let next = two_stage_refine(p, &x, &cand, keep, floor);
        iterations += 1;
        let r_next = measurement_residual(p, &next);
        let rn_next = norm2(&r_next);
        history.push(rn_next);
        if rn_next > rn {
            break Termination::ResidualIncrease;
        }
        let stationary = support(&next) == support(&x);
        x = next;
        r = r_next;
        rn = rn_next;
        if stationary && rn > tol {
            break Termination::Converged;
        }
    };
    RecoverySolution::from_estimate(p, x, iterations, termination, history)
}

/// CoSaMP with the true sparsity.
pub fn cosamp_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    let s = p.s();
    let floor = cfg.numeric_floor;
    two_stage(p, cfg, s, floor, |_, g| cosamp_candidates(g, s, floor))
}

/// Subspace pursuit with the true sparsity.
pub fn sp_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    let s = p.s();
    let floor = cfg.numeric_floor;
    two_stage(p, cfg, s, floor, |_, g| top_k_indices(g, s, floor))
}

/// Two-stage thresholding; recommended settings estimate the sparsity.
pub fn tst_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    let params = cfg.tst;
    let s = match params.sparsity {
        TstSparsity::Recommended => tst_sparsity_estimate(p.delta(), p.m()).max(1),
        TstSparsity::Known => p.s(),
    };
    let first = libm::floor(params.alpha * s as f64).max(1.0) as usize;
    let keep = libm::floor(params.beta * s as f64).max(1.0) as usize;
    two_stage(p, cfg, keep, 0.0, |x, g| tst_candidates(x, g, params.kappa, first))
}

/// Approximate message passing with soft thresholding and the Onsager
/// correction `r_{k-1} |{n : |y_{k-1,n}| >= tau_k}| / m`.
pub fn amp_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    let un = p.measurement_norm();
    if un == 0.0 {
        return RecoverySolution::zero(p);
    }
    let (n, m) = (p.n(), p.m());
    let tol = cfg.residual_tol * un;
    let mut guard = DivergenceGuard::new(p, cfg.divergence_factor);
    let mut x_prev = alloc::vec![0.0; n];
    let mut r = p.u.clone();
    let mut y_prev = p.phi.tr_mul_vec(&r).expect("m entries");
    let mut tau = kth_largest_magnitude(&y_prev, m);
    let mut x = apply_threshold(&y_prev, ThresholdFunction::soft(tau));
    let mut fit = alloc::vec![0.0; m];
    let mut y = alloc::vec![0.0; n];
    let mut history = alloc::vec![un];
    let mut best = Best { x: x_prev.clone(), residual: un };
    let mut iterations = 1;
    let termination = loop {
        p.phi.mul_vec_into(&x, &mut fit);
        let data_rn = norm2(&p.u.iter().zip(&fit).map(|(a, b)| a - b).collect::<Vec<_>>());
        history.push(data_rn);
        best.offer(&x, data_rn);
        if data_rn <= tol {
            break Termination::ResidualTol;
        }
        if iterations >= cfg.max_iterations {
            break Termination::IterationCap;
        }
        if guard.diverged(&x) {
            x = best.x.clone();
            break Termination::Diverged;
        }
        tau = match cfg.amp_threshold {
            AmpThreshold::CandidateRank => kth_largest_magnitude(&y_prev, m),
            AmpThreshold::IterateRank => {
                let t = kth_largest_magnitude(&x_prev, m);
                if t > 0.0 { t } else { kth_largest_magnitude(&y_prev, m) }
            }
        };
        let active = y_prev.iter().filter(|v| v.abs() >= tau).count();
        let onsager = active as f64 / m as f64;
        for ((ri, ui), fi) in r.iter_mut().zip(&p.u).zip(&fit) {
            *ri = ui - fi + onsager * *ri;
        }
        p.phi.tr_mul_vec_into(&r, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let next = apply_threshold(&y, ThresholdFunction::soft(tau));
        iterations += 1;
        x_prev = core::mem::replace(&mut x, next);
        core::mem::swap(&mut y_prev, &mut y);
    };
    RecoverySolution::from_estimate(p, x, iterations, termination, history)
}

/// ALPS step `||g_I||^2 / ||phi g_I||^2` for the correlation `g`
/// restricted to `set`; `None` when the restricted direction is annihilated.
pub fn alps_step_size(p: &ProblemInstance, g: &[f64], set: &[usize]) -> Option<f64> {
    let gi = scatter(p.n(), set, &set.iter().map(|&i| g[i]).collect::<Vec<_>>());
    let mut img = alloc::vec![0.0; p.m()];
    p.phi.mul_sparse_into(&gi, set, &mut img);
    let num = dot(&gi, &gi);
    let den = dot(&img, &img);
    (den > 0.0).then(|| num / den)
}

/// FISTA momentum weights `mu_k = (t_k - 1) / t_{k+1}` with `t_0 = 1`.
pub fn fista_momentum(k: usize) -> f64 {
    let mut t = 1.0f64;
    let mut mu = 0.0;
    for _ in 0..=k {
        let next = (1.0 + libm::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        mu = (t - 1.0) / next;
        t = next;
    }
    mu.clamp(0.0, 1.0)
}

/// 1-memory ALPS (accelerated hard thresholding with the true sparsity).
pub fn alps_recover(p: &ProblemInstance, cfg: &ThresholdingConfig) -> RecoverySolution {
    let un = p.measurement_norm();
    if un == 0.0 {
        return RecoverySolution::zero(p);
    }
    let (n, s) = (p.n(), p.s());
    let tol = cfg.residual_tol * un;
    let mut guard = DivergenceGuard::new(p, cfg.divergence_factor);
    let mut x = alloc::vec![0.0; n];
    let mut tb_prev = alloc::vec![0.0; n];
    let mut history = alloc::vec![un];
    let mut best = Best { x: x.clone(), residual: un };
    let mut g = alloc::vec![0.0; n];
    let mut t = 1.0f64;
    let mut iterations = 0;
    let termination = loop {
        if iterations >= cfg.max_iterations {
            break Termination::IterationCap;
        }
        let r = measurement_residual(p, &x);
        p.phi.tr_mul_vec_into(&r, &mut g);
        let sx = support(&x);
        let mut on = alloc::vec![false; n];
        sx.iter().for_each(|&i| on[i] = true);
        let off: Vec<f64> = g.iter().enumerate().map(|(i, v)| if on[i] { 0.0 } else { *v }).collect();
        let mut set = sx;
        set.extend(top_k_indices(&off, s, 0.0));
        let Some(kappa) = alps_step_size(p, &g, &set) else {
            break Termination::Converged;
        };
        let mut b = x.clone();
        for &i in &set {
            b[i] += kappa * g[i];
        }
        let tb = keep_top_k(&b, s, 0.0);
        iterations += 1;
        let rn = norm2(&measurement_residual(p, &tb));
        history.push(rn);
        best.offer(&tb, rn);
        if rn <= tol {
            break Termination::ResidualTol;
        }
        let t_next = (1.0 + libm::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        let mu = ((t - 1.0) / t_next).clamp(0.0, 1.0);
        t = t_next;
        x = tb.iter().zip(&tb_prev).map(|(a, b)| a + mu * (a - b)).collect();
        if guard.diverged(&x) {
            break Termination::Diverged;
        }
        tb_prev = tb;
    };
    RecoverySolution::from_estimate(p, best.x, iterations, termination, history)
}
