//! Greedy pursuits: OMP, probabilistic OMP, regularized OMP and stagewise OMP.
//!
//! All four share one state: a growing index set, an incremental QR of the
//! selected columns tracking `Q^T u`, and the orthogonal residual it yields.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::vector::{norm2, scatter};
use crate::numerics::IncrementalQr;
use crate::problem::ProblemInstance;
use crate::seed::{derive_seed, rng_from_seed};
use crate::solution::{RecoverySolution, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilisticParams {
    /// Probability mass spread over correlations outside the top `l`.
    pub p: f64,
    /// Size of the favoured top set.
    pub l: usize,
    pub max_candidates: usize,
}

impl Default for ProbabilisticParams {
    fn default() -> Self {
        Self {
            p: 0.001,
            l: 2,
            max_candidates: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagewiseParams {
    /// Threshold multiplier on `||r||_2 / sqrt(m)`.
    pub t: f64,
    /// Stage cap; `None` means `2 s`.
    pub max_stages: Option<usize>,
}

impl Default for StagewiseParams {
    fn default() -> Self {
        Self { t: 2.0, max_stages: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyConfig {
    /// Stop when `||r||_2 <= residual_tol * ||u||_2`.
    pub residual_tol: f64,
    /// Stop when the support size exceeds `max_support_factor * s`.
    pub max_support_factor: f64,
    pub promp: ProbabilisticParams,
    pub stomp: StagewiseParams,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-5,
            max_support_factor: 2.0,
            promp: ProbabilisticParams::default(),
            stomp: StagewiseParams::default(),
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("residual_tol must be positive"));
        }
        if !(self.max_support_factor >= 1.0) {
            return Err(Error::InvalidParameter("max_support_factor must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.promp.p) || self.promp.l == 0 || self.promp.max_candidates == 0 {
            return Err(Error::InvalidParameter("PrOMP needs 0 <= p <= 1, l >= 1, candidates >= 1"));
        }
        if !(self.stomp.t > 0.0) {
            return Err(Error::InvalidParameter("StOMP threshold must be positive"));
        }
        Ok(())
    }
}

/// Growing index set with its least-squares fit to `u`.
struct Pursuit<'a> {
    p: &'a ProblemInstance,
    qr: IncrementalQr,
    support: Vec<usize>,
    selected: Vec<bool>,
    residual: Vec<f64>,
    history: Vec<f64>,
}

impl<'a> Pursuit<'a> {
    fn new(p: &'a ProblemInstance) -> Self {
        Self {
            p,
            qr: IncrementalQr::with_target(&p.u),
            support: Vec::new(),
            selected: alloc::vec![false; p.n()],
            residual: p.u.clone(),
            history: alloc::vec![p.measurement_norm()],
        }
    }

    fn residual_norm(&self) -> f64 {
        *self.history.last().unwrap()
    }

    fn correlations(&self) -> Vec<f64> {
        self.p.phi.tr_mul_vec(&self.residual).expect("residual has m entries")
    }

    fn try_add(&mut self, j: usize) -> Result<()> {
        self.qr.push_column(&self.p.phi.column(j))?;
        self.support.push(j);
        self.selected[j] = true;
        Ok(())
    }

    /// Add columns in order, skipping dependent ones. Returns how many were added.
    fn add_batch(&mut self, cols: &[usize]) -> usize {
        let before = self.support.len();
        for &j in cols {
            if self.qr.len() == self.qr.rows() {
                break;
            }
            let _ = self.try_add(j);
        }
        self.support.len() - before
    }

    fn refresh_residual(&mut self) {
        self.residual = self.qr.residual();
        self.history.push(norm2(&self.residual));
    }

    fn finish(self, iterations: usize, termination: Termination) -> RecoverySolution {
        let coef = self.qr.coefficients();
        let x_hat = scatter(self.p.n(), &self.support, &coef);
        RecoverySolution::from_estimate(self.p, x_hat, iterations, termination, self.history)
    }
}

/// Index of the largest `|c_n|` outside the selected set; ties to the lower
/// index. `None` if every remaining correlation is zero.
fn argmax_unselected(corr: &[f64], selected: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (n, c) in corr.iter().enumerate() {
        let a = c.abs();
        if selected[n] || a == 0.0 {
            continue;
        }
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((n, a));
        }
    }
    best.map(|(n, _)| n)
}

/// One-atom-per-iteration pursuit with a pluggable selection rule.
fn single_atom_pursuit<F>(p: &ProblemInstance, cfg: &GreedyConfig, mut select: F) -> RecoverySolution
where
    F: FnMut(&[f64], &[bool], usize) -> Option<usize>,
{
    let tol = cfg.residual_tol * p.measurement_norm();
    let budget = cfg.max_support_factor * p.s() as f64;
    let mut st = Pursuit::new(p);
    let mut iterations = 0;
    let termination = loop {
        if st.residual_norm() <= tol {
            break Termination::ResidualTol;
        }
        if st.support.len() as f64 > budget {
            break Termination::SupportBudget;
        }
        let corr = st.correlations();
        let Some(j) = select(&corr, &st.selected, st.support.len()) else {
            break Termination::Converged;
        };
        if st.try_add(j).is_err() {
            break Termination::Converged;
        }
        iterations += 1;
        st.refresh_residual();
    };
    st.finish(iterations, termination)
}

/// Orthogonal matching pursuit.
pub fn omp_recover(p: &ProblemInstance, cfg: &GreedyConfig) -> RecoverySolution {
    single_atom_pursuit(p, cfg, |corr, sel, _| argmax_unselected(corr, sel))
}

/// Selection weights for probabilistic OMP over the unselected indices:
/// `(1-p)/l` on the top `l` correlations, `p/(N-k-l)` on the other nonzero
/// ones and 0 on exact zeros.
pub fn promp_weights(corr: &[f64], selected: &[bool], k: usize, params: &ProbabilisticParams) -> Vec<f64> {
    let n = corr.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| !selected[i] && corr[i] != 0.0).collect();
    order.sort_by(|&a, &b| {
        corr[b]
            .abs()
            .partial_cmp(&corr[a].abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let l = params.l.min(order.len());
    let rest = (n.saturating_sub(k + params.l)).max(1) as f64;
    let mut w = alloc::vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        w[i] = if rank < l {
            (1.0 - params.p) / params.l as f64
        } else {
            params.p / rest
        };
    }
    w
}

fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last
}

/// Probabilistic OMP. Candidate 0 follows the OMP path; candidates
/// 1.. sample their atoms with a stream derived from `seed` and the
/// candidate index. Returns the candidate with the smallest residual
/// (earliest on ties).
pub fn promp_recover(p: &ProblemInstance, cfg: &GreedyConfig, seed: u64) -> RecoverySolution {
    if p.measurement_norm() == 0.0 {
        return RecoverySolution::zero(p);
    }
    let params = cfg.promp;
    let mut best = omp_recover(p, cfg);
    for cand in 1..params.max_candidates {
        let mut rng = rng_from_seed(derive_seed(seed, "promp", &[cand as u64]));
        let sol = single_atom_pursuit(p, cfg, |corr, sel, k| {
            sample_index(&promp_weights(corr, sel, k, &params), &mut rng)
        });
        if sol.residual_norm < best.residual_norm {
            best = sol;
        }
    }
    best
}

/// ROMP comparability classes. `ranked` holds `(index, |correlation|)`
/// sorted by decreasing magnitude; each class collects the remaining
/// entries within a factor 2 of the class maximum, at most `s` of them.
pub fn comparability_classes(ranked: &[(usize, f64)], s: usize) -> Vec<Vec<usize>> {
    let s = s.max(1);
    let mut classes = Vec::new();
    let mut i = 0;
    while i < ranked.len() {
        let top = ranked[i].1;
        let mut class = Vec::new();
        while i < ranked.len() && class.len() < s && ranked[i].1 >= 0.5 * top {
            class.push(ranked[i].0);
            i += 1;
        }
        classes.push(class);
    }
    classes
}

/// The ROMP selection `J*`: the comparability class of largest correlation
/// energy among unselected indices with nonzero correlation.
pub fn romp_select(corr: &[f64], selected: &[bool], s: usize) -> Vec<usize> {
    let mut ranked: Vec<(usize, f64)> = corr
        .iter()
        .enumerate()
        .filter(|(i, c)| !selected[*i] && **c != 0.0)
        .map(|(i, c)| (i, c.abs()))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let classes = comparability_classes(&ranked, s);
    let energy = |c: &Vec<usize>| c.iter().map(|&j| corr[j] * corr[j]).sum::<f64>();
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in classes.iter().enumerate() {
        let e = energy(c);
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((k, e));
        }
    }
    best.map(|(k, _)| classes[k].clone()).unwrap_or_default()
}

/// Regularized OMP (uses the true sparsity of `p`).
pub fn romp_recover(p: &ProblemInstance, cfg: &GreedyConfig) -> RecoverySolution {
    let tol = cfg.residual_tol * p.measurement_norm();
    let budget = cfg.max_support_factor * p.s() as f64;
    let mut st = Pursuit::new(p);
    let mut stages = 0;
    let termination = loop {
        if st.residual_norm() <= tol {
            break Termination::ResidualTol;
        }
        if st.support.len() as f64 > budget {
            break Termination::SupportBudget;
        }
        let corr = st.correlations();
        let chosen = romp_select(&corr, &st.selected, p.s());
        if chosen.is_empty() || st.add_batch(&chosen) == 0 {
            break Termination::Converged;
        }
        stages += 1;
        st.refresh_residual();
    };
    st.finish(stages, termination)
}

/// StOMP selection: unselected indices with `|c_i| > t ||r||_2 / sqrt(m)`,
/// by decreasing magnitude.
pub fn stomp_select(corr: &[f64], selected: &[bool], residual_norm: f64, m: usize, t: f64) -> Vec<usize> {
    let threshold = t * residual_norm / libm::sqrt(m as f64);
    let mut chosen: Vec<usize> = (0..corr.len())
        .filter(|&i| !selected[i] && corr[i].abs() > threshold)
        .collect();
    chosen.sort_by(|&a, &b| {
        corr[b]
            .abs()
            .partial_cmp(&corr[a].abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    chosen
}

/// Stagewise OMP with false-discovery threshold `t`.
pub fn stomp_recover(p: &ProblemInstance, cfg: &GreedyConfig) -> RecoverySolution {
    let tol = cfg.residual_tol * p.measurement_norm();
    let max_stages = cfg.stomp.max_stages.unwrap_or(2 * p.s());
    let mut st = Pursuit::new(p);
    let mut stages = 0;
    let termination = loop {
        if st.residual_norm() <= tol {
            break Termination::ResidualTol;
        }
        if stages >= max_stages {
            break Termination::IterationCap;
        }
        let corr = st.correlations();
        let chosen = stomp_select(&corr, &st.selected, st.residual_norm(), p.m(), cfg.stomp.t);
        if chosen.is_empty() || st.add_batch(&chosen) == 0 {
            break Termination::Converged;
        }
        stages += 1;
        st.refresh_residual();
    };
    st.finish(stages, termination)
}
