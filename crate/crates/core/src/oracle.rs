//! Exhaustive support search for tiny instances.

use alloc::vec::Vec;

use crate::numerics::IncrementalQr;
use crate::numerics::vector::scatter;
use crate::problem::ProblemInstance;

/// The sparsest `x` with `||u - phi x|| <= rel_tol ||u||`, searching every
/// support of size up to `max_s` in lexicographic order. Among feasible
/// supports of the smallest size the one with the least residual wins.
/// `None` when no support of size `<= max_s` fits.
pub fn sparsest_solution(p: &ProblemInstance, max_s: usize, rel_tol: f64) -> Option<Vec<f64>> {
    let n = p.n();
    let tol = rel_tol * p.measurement_norm();
    if p.measurement_norm() == 0.0 {
        return Some(alloc::vec![0.0; n]);
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| p.phi.column(j)).collect();
    for k in 1..=max_s.min(p.m()) {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut qr = IncrementalQr::with_target(&p.u);
            if idx.iter().all(|&j| qr.push_column(&cols[j]).is_ok()) {
                let r = qr.residual_norm();
                if r <= tol && best.as_ref().is_none_or(|b| r < b.0) {
                    best = Some((r, idx.clone(), qr.coefficients()));
                }
            }
            if !next_subset(&mut idx, n) {
                break;
            }
        }
        if let Some((_, s, c)) = best {
            return Some(scatter(n, &s, &c));
        }
    }
    None
}

/// Advance `idx` to the next `k`-subset of `0..n`; false after the last.
fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
