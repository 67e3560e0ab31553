use alloc::vec::Vec;

use super::matrix::DenseMatrix;
use super::vector::{dot, norm2};

const MAX_SWEEPS: usize = 80;

/// Singular values of `a`, descending, via one-sided Jacobi on the shorter
/// dimension. Returns `min(rows, cols)` values.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let mut w: Vec<Vec<f64>> = if a.rows() <= a.cols() {
        (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
    } else {
        (0..a.cols()).map(|j| a.column(j)).collect()
    };
    let k = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                let (lo, hi) = w.split_at_mut(j);
                for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (xi, yi) = (*x, *y);
                    *x = c * xi - s * yi;
                    *y = s * xi + c * yi;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = w.iter().map(|v| norm2(v)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Lower and upper frame bounds of a linear map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    /// `upper / lower`, or `None` when the lower bound vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.lower > 0.0).then(|| self.upper / self.lower)
    }
}

/// Extreme singular values of `phi` viewed as a map on all of `R^cols`.
/// A wide matrix has a nontrivial null space, so its lower bound is zero.
pub fn frame_bounds(phi: &DenseMatrix) -> FrameBounds {
    let sv = singular_values(phi);
    let upper = sv[0];
    let lower = if phi.rows() < phi.cols() { 0.0 } else { *sv.last().unwrap() };
    FrameBounds { lower, upper }
}
