//! Householder QR with column-at-a-time updates.
//!
//! Columns are appended one at a time; the factorization keeps the
//! Householder reflectors, the columns of `R`, and optionally `Q^T b` for a
//! fixed right-hand side so that least-squares coefficients and residuals
//! can be read off after every append. Appending `k` columns in order gives
//! the same factors as factoring the `m x k` matrix at once.

use alloc::vec::Vec;

use super::matrix::DenseMatrix;
use super::vector::{dot, norm2};
use crate::error::{Error, Result};

/// A new column is rejected when its `R` diagonal falls below this fraction
/// of the largest diagonal magnitude seen so far.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct IncrementalQr {
    m: usize,
    reflectors: Vec<Vec<f64>>,
    taus: Vec<f64>,
    r_cols: Vec<Vec<f64>>,
    max_diag: f64,
    qtb: Option<Vec<f64>>,
}

fn apply_reflector(v: &[f64], tau: f64, y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = tau * dot(v, y);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= w * vi;
    }
}

impl IncrementalQr {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            reflectors: Vec::new(),
            taus: Vec::new(),
            r_cols: Vec::new(),
            max_diag: 0.0,
            qtb: None,
        }
    }

    /// Factorization that also tracks `Q^T b`.
    pub fn with_target(b: &[f64]) -> Self {
        let mut qr = Self::new(b.len());
        qr.qtb = Some(b.to_vec());
        qr
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    /// Number of columns factored so far.
    pub fn len(&self) -> usize {
        self.r_cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_cols.is_empty()
    }

    /// Append a column. On rank failure the factorization is left unchanged.
    pub fn push_column(&mut self, col: &[f64]) -> Result<()> {
        if col.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: col.len(),
            });
        }
        let k = self.len();
        if k == self.m {
            return Err(Error::RankDeficient {
                rank: k,
                required: k + 1,
            });
        }
        let mut w = col.to_vec();
        for (j, (v, &tau)) in self.reflectors.iter().zip(&self.taus).enumerate() {
            apply_reflector(v, tau, &mut w[j..]);
        }
        let (v, tau, beta) = householder(&w[k..]);
        let scale = self.max_diag.max(beta.abs());
        if beta == 0.0 || beta.abs() < RANK_TOL * scale {
            return Err(Error::RankDeficient {
                rank: k,
                required: k + 1,
            });
        }
        let mut rc = w[..k].to_vec();
        rc.push(beta);
        if let Some(qtb) = self.qtb.as_mut() {
            apply_reflector(&v, tau, &mut qtb[k..]);
        }
        self.max_diag = scale;
        self.r_cols.push(rc);
        self.reflectors.push(v);
        self.taus.push(tau);
        Ok(())
    }

    /// `y <- Q^T y` (full `m x m` orthogonal factor).
    pub fn apply_qt(&self, y: &mut [f64]) {
        for (j, (v, &tau)) in self.reflectors.iter().zip(&self.taus).enumerate() {
            apply_reflector(v, tau, &mut y[j..]);
        }
    }

    /// `y <- Q y`.
    pub fn apply_q(&self, y: &mut [f64]) {
        for (j, (v, &tau)) in self.reflectors.iter().zip(&self.taus).enumerate().rev() {
            apply_reflector(v, tau, &mut y[j..]);
        }
    }

    /// Solve `R c = y[..k]` by back substitution.
    fn back_substitute(&self, y: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut c = y[..k].to_vec();
        for j in (0..k).rev() {
            c[j] /= self.r_cols[j][j];
            let cj = c[j];
            for (i, ci) in c.iter_mut().enumerate().take(j) {
                *ci -= self.r_cols[j][i] * cj;
            }
        }
        c
    }

    /// Least-squares coefficients for the tracked right-hand side.
    pub fn coefficients(&self) -> Vec<f64> {
        match &self.qtb {
            Some(qtb) => self.back_substitute(qtb),
            None => alloc::vec![0.0; self.len()],
        }
    }

    /// Least-squares coefficients for an arbitrary right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        self.back_substitute(&y)
    }

    /// `b - A c` for the tracked right-hand side.
    pub fn residual(&self) -> Vec<f64> {
        let k = self.len();
        let mut y = match &self.qtb {
            Some(qtb) => qtb.clone(),
            None => return alloc::vec![0.0; self.m],
        };
        y[..k].iter_mut().for_each(|v| *v = 0.0);
        self.apply_q(&mut y);
        y
    }

    pub fn residual_norm(&self) -> f64 {
        self.qtb.as_ref().map_or(0.0, |q| norm2(&q[self.len()..]))
    }

    /// Solve `R^T y = b[..k]` by forward substitution.
    pub fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut y = b[..k].to_vec();
        for j in 0..k {
            let s: f64 = (0..j).map(|i| self.r_cols[j][i] * y[i]).sum();
            y[j] = (y[j] - s) / self.r_cols[j][j];
        }
        y
    }

    /// Columns of the thin orthonormal factor, each of length `m`.
    pub fn thin_q(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let mut e = alloc::vec![0.0; self.m];
                e[i] = 1.0;
                self.apply_q(&mut e);
                e
            })
            .collect()
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        self.r_cols.iter().enumerate().map(|(j, c)| c[j]).collect()
    }
}

/// Reflector `H = I - tau v v^T` with `v[0] = 1` mapping `x` to `beta e_1`.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let alpha = x[0];
    let tail = norm2(&x[1..]);
    let mut v = x.to_vec();
    v[0] = 1.0;
    if tail == 0.0 {
        for vi in v.iter_mut().skip(1) {
            *vi = 0.0;
        }
        return (v, 0.0, alpha);
    }
    let norm = libm::hypot(alpha, tail);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for vi in v.iter_mut().skip(1) {
        *vi *= scale;
    }
    (v, tau, beta)
}

/// Minimizer of `||b - A c||_2` for a full-column-rank `A`.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    if a.cols() > a.rows() {
        return Err(Error::RankDeficient {
            rank: a.rows(),
            required: a.cols(),
        });
    }
    let mut qr = IncrementalQr::with_target(b);
    for j in 0..a.cols() {
        qr.push_column(&a.column(j)).map_err(|e| match e {
            Error::RankDeficient { rank, .. } => Error::RankDeficient {
                rank,
                required: a.cols(),
            },
            other => other,
        })?;
    }
    Ok(qr.coefficients())
}

/// Least squares restricted to the columns `support` of `phi`.
///
/// Columns are appended in the given order; any column that is numerically
/// dependent on those before it is skipped. Returns the accepted indices and
/// their coefficients.
pub fn least_squares_on_support(
    phi: &DenseMatrix,
    u: &[f64],
    support: &[usize],
) -> (Vec<usize>, Vec<f64>) {
    let mut qr = IncrementalQr::with_target(u);
    let mut kept = Vec::with_capacity(support.len());
    for &j in support {
        if qr.len() == qr.rows() {
            break;
        }
        if qr.push_column(&phi.column(j)).is_ok() {
            kept.push(j);
        }
    }
    let coef = qr.coefficients();
    (kept, coef)
}
