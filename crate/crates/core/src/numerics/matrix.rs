use alloc::vec::Vec;

use super::vector::{axpy, dot};
use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build from row-major entries. All entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions("matrix must have at least one row and column"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Build from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidDimensions("ragged columns"));
        }
        let mut data = alloc::vec![0.0; rows * cols];
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                data[i * cols + j] = *v;
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = alloc::vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Copy of the selected columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Self {
            rows: self.rows,
            cols: k,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = alloc::vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut out = alloc::vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        Ok(out)
    }

    /// `out = self * x`; lengths must agree.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `self * x` where `x` is given sparsely by `(index, value)` pairs.
    pub fn mul_sparse_into(&self, x: &[f64], support: &[usize], out: &mut [f64]) {
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            *o = support.iter().map(|&j| row[j] * x[j]).sum();
        }
    }

    /// `self^T * r`
    pub fn tr_mul_vec(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: r.len(),
            });
        }
        let mut out = alloc::vec![0.0; self.cols];
        self.tr_mul_vec_into(r, &mut out);
        Ok(out)
    }

    /// `out = self^T * r`; lengths must agree.
    pub fn tr_mul_vec_into(&self, r: &[f64], out: &mut [f64]) {
        assert_eq!(r.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &ri) in r.iter().enumerate() {
            if ri != 0.0 {
                axpy(ri, self.row(i), out);
            }
        }
    }

    /// Symmetric `self * diag(d) * self^T`, row-major `rows x rows`.
    pub fn weighted_gram(&self, d: &[f64]) -> Vec<f64> {
        assert_eq!(d.len(), self.cols);
        let m = self.rows;
        let mut out = alloc::vec![0.0; m * m];
        let mut scaled = alloc::vec![0.0; self.cols];
        for i in 0..m {
            for ((s, a), w) in scaled.iter_mut().zip(self.row(i)).zip(d) {
                *s = a * w;
            }
            for j in 0..=i {
                let v = dot(&scaled, self.row(j));
                out[i * m + j] = v;
                out[j * m + i] = v;
            }
        }
        out
    }
}
