use alloc::vec::Vec;

use super::matrix::DenseMatrix;
use super::qr::IncrementalQr;
use super::vector::{axpy, dot};
use crate::error::{Error, Result};

/// Orthogonal factorization `phi^T = Q R` of a full-row-rank wide matrix.
///
/// Gives the minimum-norm solution `phi^T (phi phi^T)^{-1} u = Q R^{-T} u`
/// and the orthogonal projection onto the affine set `{x : phi x = u}`.
#[derive(Debug, Clone)]
pub struct RowSpaceProjector {
    q: Vec<Vec<f64>>,
    qr: IncrementalQr,
}

impl RowSpaceProjector {
    pub fn new(phi: &DenseMatrix) -> Result<Self> {
        let (m, n) = (phi.rows(), phi.cols());
        if m > n {
            return Err(Error::RankDeficient { rank: n, required: m });
        }
        let mut qr = IncrementalQr::new(n);
        for i in 0..m {
            qr.push_column(phi.row(i)).map_err(|e| match e {
                Error::RankDeficient { rank, .. } => Error::RankDeficient { rank, required: m },
                other => other,
            })?;
        }
        let q = qr.thin_q();
        Ok(Self { q, qr })
    }

    pub fn measurements(&self) -> usize {
        self.q.len()
    }

    /// Coordinates `R^{-T} u` of the minimum-norm solution in the basis `Q`.
    pub fn coordinates(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.q.len());
        self.qr.solve_rt(u)
    }

    fn combine(&self, coords: &[f64]) -> Vec<f64> {
        let mut x = alloc::vec![0.0; self.qr.rows()];
        for (qi, &c) in self.q.iter().zip(coords) {
            axpy(c, qi, &mut x);
        }
        x
    }

    pub fn min_norm_solution(&self, u: &[f64]) -> Vec<f64> {
        self.combine(&self.coordinates(u))
    }

    /// `x <- x - phi^T (phi phi^T)^{-1} (phi x - u)` where `coords = R^{-T} u`.
    pub fn project_in_place(&self, x: &mut [f64], coords: &[f64]) {
        for (qi, &c) in self.q.iter().zip(coords) {
            let t = dot(qi, x) - c;
            axpy(-t, qi, x);
        }
    }

    /// Component of `w` in the null space of `phi`.
    pub fn null_space_component(&self, w: &[f64]) -> Vec<f64> {
        let mut z = w.to_vec();
        let zeros = alloc::vec![0.0; self.q.len()];
        self.project_in_place(&mut z, &zeros);
        z
    }
}

/// Minimum-ℓ2-norm solution of `phi x = u`.
pub fn row_space_project(phi: &DenseMatrix, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != phi.rows() {
        return Err(Error::DimensionMismatch {
            expected: phi.rows(),
            found: u.len(),
        });
    }
    Ok(RowSpaceProjector::new(phi)?.min_norm_solution(u))
}
