//! Debiasing, recovery criteria, success rates, and phase-transition location.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::vector::{norm2, sub, top_k_indices};
use crate::numerics::{frame_bounds, DenseMatrix, IncrementalQr};

/// Entries at or below this magnitude count as zero after debiasing.
pub const SUPPORT_FLOOR: f64 = 1e-10;

/// Least squares on the widest full-rank prefix (at most m columns) of the
/// entries of `x_hat` ranked by decreasing magnitude, then hard-thresholded
/// at [`SUPPORT_FLOOR`]. Columns dependent on larger entries are dropped.
pub fn debias(x_hat: &[f64], phi: &DenseMatrix, u: &[f64]) -> Vec<f64> {
    let n = x_hat.len();
    let m = phi.rows();
    let ranked = top_k_indices(x_hat, n, 0.0);
    let mut qr = IncrementalQr::with_target(u);
    let mut kept = Vec::with_capacity(m.min(ranked.len()));
    for &j in &ranked {
        if kept.len() == m {
            break;
        }
        if qr.push_column(&phi.column(j)).is_ok() {
            kept.push(j);
        }
    }
    let coef = qr.coefficients();
    let mut out = alloc::vec![0.0; n];
    for (&j, &c) in kept.iter().zip(&coef) {
        if c.abs() > SUPPORT_FLOOR {
            out[j] = c;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    RelativeL2,
    SupportEquality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryCriterion {
    pub kind: CriterionKind,
    pub epsilon_x: f64,
}

impl RecoveryCriterion {
    pub const L2: Self = Self {
        kind: CriterionKind::RelativeL2,
        epsilon_x: 1e-2,
    };
    pub const SUPPORT: Self = Self {
        kind: CriterionKind::SupportEquality,
        epsilon_x: 1e-2,
    };

    pub fn id(&self) -> &'static str {
        match self.kind {
            CriterionKind::RelativeL2 => "l2",
            CriterionKind::SupportEquality => "support",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_x > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("epsilon_x must be positive"))
        }
    }
}

/// `||x - x_hat|| / ||x|| <= eps_x`
pub fn check_l2(x: &[f64], x_hat: &[f64], c: RecoveryCriterion) -> Result<bool> {
    let nx = norm2(x);
    if nx == 0.0 {
        return Err(Error::ZeroTruth);
    }
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: x_hat.len() });
    }
    Ok(norm2(&sub(x, x_hat)) / nx <= c.epsilon_x)
}

/// Identical nonzero index sets.
pub fn check_support(x: &[f64], x_hat: &[f64]) -> bool {
    x.len() == x_hat.len() && x.iter().zip(x_hat).all(|(a, b)| (*a != 0.0) == (*b != 0.0))
}

/// Outcome of one trial in the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: String,
    pub distribution: String,
    pub delta: f64,
    pub rho: f64,
    pub delta_index: usize,
    pub rho_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub success_l2: bool,
    pub success_support: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// Empty when the trial ran cleanly.
    pub error_tag: String,
}

impl TrialRecord {
    pub fn success(&self, c: RecoveryCriterion) -> bool {
        match c.kind {
            CriterionKind::RelativeL2 => self.success_l2,
            CriterionKind::SupportEquality => self.success_support,
        }
    }

    /// Support equality without ℓ2 success is impossible for a correct pipeline.
    pub fn implication_holds(&self) -> bool {
        !self.success_support || self.success_l2
    }
}

/// Fraction of successes in one homogeneous cell.
pub fn success_probability(records: &[TrialRecord], c: RecoveryCriterion) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyCell)?;
    let same_cell = records.iter().all(|r| {
        r.algorithm == first.algorithm
            && r.distribution == first.distribution
            && r.delta == first.delta
            && r.rho == first.rho
    });
    if !same_cell {
        return Err(Error::GridMismatch);
    }
    let hits = records.iter().filter(|r| r.success(c)).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Level-0.5 crossing of the success curve, linearly interpolated at the
/// first downward crossing from the sparse end. `None` if the curve starts
/// below 0.5; the largest `rho` if it never drops below.
pub fn phase_transition(rho: &[f64], probs: &[f64]) -> Result<Option<f64>> {
    if rho.is_empty() || rho.len() != probs.len() || rho.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::GridMismatch);
    }
    if probs[0] < 0.5 {
        return Ok(None);
    }
    for i in 1..rho.len() {
        if probs[i] < 0.5 {
            let (p0, p1) = (probs[i - 1], probs[i]);
            let t = (p0 - 0.5) / (p0 - p1);
            return Ok(Some(rho[i - 1] + t * (rho[i] - rho[i - 1])));
        }
    }
    Ok(Some(*rho.last().expect("nonempty")))
}

/// Whether a success curve ever rises after falling.
pub fn is_monotone_nonincreasing(probs: &[f64]) -> bool {
    probs.windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionCurve {
    pub algorithm: String,
    pub distribution: String,
    pub criterion: CriterionKind,
    /// `(delta, rho_half)`
    pub points: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundCheck {
    pub implies_l2: bool,
    /// The lower frame bound vanished, so no bound is available.
    pub vacuous: bool,
}

/// Whether `(B / A) eps_u <= eps_x`, i.e. the residual stopping rule is
/// enough to certify ℓ2 recovery for `phi`.
pub fn criterion_bound_check(phi: &DenseMatrix, eps_u: f64, eps_x: f64) -> BoundCheck {
    match frame_bounds(phi).ratio() {
        Some(r) => BoundCheck {
            implies_l2: r * eps_u <= eps_x,
            vacuous: false,
        },
        None => BoundCheck {
            implies_l2: false,
            vacuous: true,
        },
    }
}
