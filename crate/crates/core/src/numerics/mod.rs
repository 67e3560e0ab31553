//! Dense linear-algebra kernels shared by the recovery algorithms.

mod cholesky;
mod matrix;
mod projector;
mod qr;
pub mod special;
mod svd;
pub mod vector;

pub use cholesky::Cholesky;
pub use matrix::DenseMatrix;
pub use projector::{row_space_project, RowSpaceProjector};
pub use qr::{least_squares, least_squares_on_support, IncrementalQr, RANK_TOL};
pub use svd::{frame_bounds, singular_values, FrameBounds};

use alloc::vec::Vec;

use crate::error::Result;

/// Correlations `phi_n^T r` of every column with `r`.
pub fn correlate(phi: &DenseMatrix, r: &[f64]) -> Result<Vec<f64>> {
    phi.tr_mul_vec(r)
}
