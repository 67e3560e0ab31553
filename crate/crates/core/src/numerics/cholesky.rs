use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Cholesky factor `L` of a symmetric positive definite matrix (row-major).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor `a` (row-major `n x n`, only the lower triangle is read).
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = a.to_vec();
        let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 1e-14 * max_diag) {
                return Err(Error::RankDeficient { rank: j, required: n });
            }
            let d = libm::sqrt(d);
            l[j * n + j] = d;
            let (head, tail) = l.split_at_mut((j + 1) * n);
            let lj = &head[j * n..j * n + j];
            for i in j + 1..n {
                let row = &mut tail[(i - j - 1) * n..(i - j) * n];
                let s = super::vector::dot(&row[..j], lj);
                row[j] = (row[j] - s) / d;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                l[i * n + j] = 0.0;
            }
        }
        Ok(Self { n, l })
    }

    /// Solve `L L^T x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let s = super::vector::dot(&self.l[i * n..i * n + i], &b[..i]);
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let ch = Cholesky::factor(&a, 3).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        ch.solve_in_place(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_fails() {
        assert!(Cholesky::factor(&[1.0, 1.0, 1.0, 1.0], 2).is_err());
    }
}
