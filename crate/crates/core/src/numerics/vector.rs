//! Small dense-vector kernels on `f64` slices.

use alloc::vec::Vec;

/// Inner product. Uses several accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| if v.abs() > m { v.abs() } else { m })
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Indices of nonzero entries, ascending.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the `k` largest-magnitude entries whose magnitude exceeds
/// `floor`, ordered by decreasing magnitude. Ties go to the lower index.
pub fn top_k_indices(x: &[f64], k: usize, floor: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > floor).collect();
    let cmp = |a: &usize, b: &usize| {
        x[*b]
            .abs()
            .partial_cmp(&x[*a].abs())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(b))
    };
    if k < idx.len() {
        idx.select_nth_unstable_by(k, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    idx
}

/// Keep the `k` largest-magnitude entries above `floor`, zero the rest.
pub fn keep_top_k(x: &[f64], k: usize, floor: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; x.len()];
    for i in top_k_indices(x, k, floor) {
        out[i] = x[i];
    }
    out
}

/// Scatter `values` into a zero vector of length `n` at `indices`.
pub fn scatter(n: usize, indices: &[usize], values: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n];
    for (&i, &v) in indices.iter().zip(values) {
        out[i] = v;
    }
    out
}

/// `count` linearly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            let mut v: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
            v[count - 1] = hi;
            v
        }
    }
}
