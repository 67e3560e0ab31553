use recover_core::evaluation::{check_l2, check_support, criterion_bound_check};
use recover_core::greedy::{omp_recover, promp_recover, GreedyConfig};
use recover_core::numerics::vector::{dot, norm2, norm2_sq, scatter, sub};
use recover_core::numerics::{least_squares, least_squares_on_support, singular_values};
use recover_core::oracle::sparsest_solution;
use recover_core::problem::{sample_sensing_matrix, sample_sparse_vector};
use recover_core::relaxation::{
    bp_solve, gpsr_solve, irl1_solve, sigma_ladder, sl0_recover, GpsrConfig, Irl1Config, LpSolverConfig, Sl0Config,
};
use recover_core::thresholding::{
    alps_recover, amp_recover, apply_threshold, cosamp_recover, ist_recover, kth_largest_magnitude, sp_recover,
    tst_recover, FalseAlarmSchedule, ThresholdFunction, ThresholdingConfig, TstSparsity,
};
use recover_core::{debias, recover, Algorithm, AlgorithmConfig, DenseMatrix, DistributionSpec, ProblemInstance};

fn tiny(seed: u64) -> ProblemInstance {
    let phi = sample_sensing_matrix(6, 8, seed).unwrap();
    let x = sample_sparse_vector(8, 2, DistributionSpec::NORMAL, seed ^ 0x5a5a).unwrap();
    ProblemInstance::new(phi, x).unwrap()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    // unit columns then rescaled so the matrix is not column-normalized
    let m = sample_sensing_matrix(rows, rows + cols, seed).unwrap();
    let cs: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j).iter().map(|v| v * (1.0 + j as f64)).collect()).collect();
    DenseMatrix::from_columns(&cs).unwrap()
}

#[test]
fn oracle_recovers_truth_on_tiny_instances() {
    for seed in 0..20 {
        let p = tiny(seed);
        let o = sparsest_solution(&p, 2, 1e-9).unwrap();
        assert!(max_err(&o, &p.x) < 1e-9, "seed {seed}");
    }
}

#[test]
fn omp_matches_exhaustive_oracle() {
    let cfg = GreedyConfig::default();
    for seed in 0..20 {
        let p = tiny(seed);
        let o = sparsest_solution(&p, 2, 1e-9).unwrap();
        let sol = omp_recover(&p, &cfg);
        let xd = debias(&sol.x_hat, &p.phi, &p.u);
        if check_support(&o, &xd) {
            assert!(max_err(&xd, &o) < 1e-6, "seed {seed}");
        }
    }
    let p = tiny(3);
    let sol = omp_recover(&p, &cfg);
    assert!(max_err(&sol.x_hat, &p.x) < 1e-6);
}

#[test]
fn promp_never_worse_than_omp() {
    let cfg = GreedyConfig::default();
    for seed in 0..20 {
        let p = tiny(seed);
        let a = omp_recover(&p, &cfg);
        let b = promp_recover(&p, &cfg, seed);
        assert!(b.residual_norm <= a.residual_norm + 1e-12, "seed {seed}");
    }
}

#[test]
fn two_stage_methods_match_oracle_support() {
    let cfg = ThresholdingConfig::default();
    let mut hits = [0; 3];
    for seed in 0..20 {
        let p = tiny(seed);
        let o = sparsest_solution(&p, 2, 1e-9).unwrap();
        for (k, sol) in [cosamp_recover(&p, &cfg), sp_recover(&p, &cfg), alps_recover(&p, &cfg)].iter().enumerate() {
            if check_support(&o, &debias(&sol.x_hat, &p.phi, &p.u)) {
                hits[k] += 1;
            }
            assert!(sol.support.len() <= 2);
        }
    }
    // ALPS is allowed to miss; only the sparsity discipline is checked for it
    assert!(hits[0] >= 18 && hits[1] >= 18, "{hits:?}");
}

#[test]
fn bp_objective_bounded_by_truth() {
    let lp = LpSolverConfig::default();
    for seed in 0..20 {
        let p = tiny(seed);
        let (sol, dual) = bp_solve(&p, &lp).unwrap();
        let l1: f64 = sol.x_hat.iter().map(|v| v.abs()).sum();
        let truth: f64 = p.x.iter().map(|v| v.abs()).sum();
        assert!(l1 <= truth + 1e-7, "seed {seed}");
        assert!(dual.converged);
        if max_err(&sol.x_hat, &p.x) < 1e-6 {
            assert!(check_support(&p.x, &debias(&sol.x_hat, &p.phi, &p.u)));
        }
    }
}

#[test]
fn bp_identity_returns_measurement() {
    let u = vec![1.5, -2.0, 0.0, 0.25];
    let p = ProblemInstance::new(DenseMatrix::identity(4), u.clone()).unwrap();
    let (sol, _) = bp_solve(&p, &LpSolverConfig::default()).unwrap();
    assert!(max_err(&sol.x_hat, &u) < 1e-8);
}

#[test]
fn sl0_matches_oracle_and_ladder_length() {
    let cfg = Sl0Config::default();
    let mut hits = 0;
    for seed in 0..20 {
        let p = tiny(seed);
        let o = sparsest_solution(&p, 2, 1e-9).unwrap();
        let sol = sl0_recover(&p, &cfg).unwrap();
        if check_support(&o, &debias(&sol.x_hat, &p.phi, &p.u)) {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}");
    // ceil(ln(2e-5) / ln 0.95) + 1
    let expected = ((4e-5f64 / 2.0).ln() / 0.95f64.ln()).ceil() as usize + 1;
    assert_eq!(sigma_ladder(2.0, &cfg).len(), expected);
}

#[test]
fn sl0_identity_pins_measurement() {
    let u = vec![0.0, 3.0, -1.0];
    let p = ProblemInstance::new(DenseMatrix::identity(3), u.clone()).unwrap();
    let sol = sl0_recover(&p, &Sl0Config::default()).unwrap();
    assert!(max_err(&sol.x_hat, &u) < 1e-12);
}

#[test]
fn irl1_first_pass_is_basis_pursuit() {
    let p = tiny(5);
    let one = Irl1Config { max_outer: 1, ..Irl1Config::default() };
    let (a, _) = irl1_solve(&p, &one).unwrap();
    let (b, _) = bp_solve(&p, &one.lp).unwrap();
    assert_eq!(a.x_hat, b.x_hat);
}

#[test]
fn gpsr_identity_shrinks_like_soft_threshold() {
    let p = ProblemInstance::new(DenseMatrix::identity(2), vec![10.0, 0.001]).unwrap();
    let cfg = GpsrConfig { lambda_factor: 0.005, ..GpsrConfig::default() };
    let (sol, trace) = gpsr_solve(&p, &cfg);
    assert!((trace.lambda - 0.05).abs() < 1e-12);
    assert!((sol.x_hat[0] - 9.95).abs() < 1e-6);
    assert_eq!(sol.x_hat[1], 0.0);
}

#[test]
fn gpsr_debiased_matches_support_least_squares() {
    let phi = sample_sensing_matrix(40, 80, 11).unwrap();
    let x = sample_sparse_vector(80, 4, DistributionSpec::BIMODAL_GAUSSIAN, 12).unwrap();
    let p = ProblemInstance::new(phi, x).unwrap();
    let (sol, _) = gpsr_solve(&p, &GpsrConfig::default());
    let xd = debias(&sol.x_hat, &p.phi, &p.u);
    assert!(max_err(&xd, &p.x) < 1e-6);
}

#[test]
fn ist_with_zero_threshold_on_orthonormal_square_converges() {
    // far = 1 at delta = 1 puts the quantile at zero
    let q = DenseMatrix::from_rows(&[&[0.6, 0.8], &[-0.8, 0.6]]).unwrap();
    let p = ProblemInstance::new(q, vec![1.0, -2.0]).unwrap();
    let schedule = FalseAlarmSchedule { far_per_delta: 1.0 };
    let cfg = ThresholdingConfig { ist_schedule: schedule, ..ThresholdingConfig::default() };
    let sol = ist_recover(&p, &cfg);
    assert!(max_err(&sol.x_hat, &p.x) < 1e-4);
}

#[test]
fn easy_instance_thresholding_succeeds_after_debias() {
    let phi = sample_sensing_matrix(54, 100, 21).unwrap();
    let x = sample_sparse_vector(100, 3, DistributionSpec::NORMAL, 22).unwrap();
    let p = ProblemInstance::new(phi, x).unwrap();
    let cfg = AlgorithmConfig::default();
    for alg in [Algorithm::Iht, Algorithm::Ist, Algorithm::Omp] {
        let sol = recover(alg, &p, &cfg, 0).unwrap();
        let xd = debias(&sol.x_hat, &p.phi, &p.u);
        assert!(check_support(&p.x, &xd), "{alg}");
    }
}

#[test]
fn amp_easy_bernoulli_agrees_with_bp() {
    let phi = sample_sensing_matrix(200, 400, 31).unwrap();
    let x = sample_sparse_vector(400, 10, DistributionSpec::BERNOULLI, 32).unwrap();
    let p = ProblemInstance::new(phi, x).unwrap();
    let a = amp_recover(&p, &ThresholdingConfig::default());
    let (b, _) = bp_solve(&p, &LpSolverConfig::default()).unwrap();
    assert!(check_support(&p.x, &debias(&a.x_hat, &p.phi, &p.u)));
    assert!(check_support(&p.x, &debias(&b.x_hat, &p.phi, &p.u)));
}

#[test]
fn amp_first_iterate_by_hand() {
    let phi = sample_sensing_matrix(3, 6, 41).unwrap();
    let x = sample_sparse_vector(6, 1, DistributionSpec::NORMAL, 42).unwrap();
    let p = ProblemInstance::new(phi, x).unwrap();
    let cfg = ThresholdingConfig { max_iterations: 1, ..ThresholdingConfig::default() };
    let sol = amp_recover(&p, &cfg);
    // x_1 = T(phi^T u; tau_0), tau_0 = 3rd largest |phi^T u|
    let g: Vec<f64> = (0..6).map(|j| dot(&p.phi.column(j), &p.u)).collect();
    let tau = kth_largest_magnitude(&g, 3);
    let hand = apply_threshold(&g, ThresholdFunction::soft(tau));
    assert!(max_err(&sol.x_hat, &hand) < 1e-12);
    assert_eq!(hand.iter().filter(|v| **v != 0.0).count(), 2);
}

#[test]
fn tst_follows_cosamp_when_union_condition_holds() {
    // orthonormal square: x + phi^T r recovers x exactly so the candidate
    // support is S(x_k) union S(T_s(phi^T r_k)) at every step
    let phi = DenseMatrix::identity(6);
    let p = ProblemInstance::new(phi, vec![0.0, 4.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
    let mut cfg = ThresholdingConfig::default();
    cfg.tst.alpha = 2.0;
    cfg.tst.beta = 1.0;
    cfg.tst.kappa = 1.0;
    cfg.tst.sparsity = TstSparsity::Known;
    let a = tst_recover(&p, &cfg);
    let b = cosamp_recover(&p, &cfg);
    assert_eq!(a.support, b.support);
    assert!(max_err(&a.x_hat, &b.x_hat) < 1e-12);
    assert_eq!(a.support, vec![1, 3]);
}

#[test]
fn debias_keeps_true_entries_within_rank_budget() {
    let phi = sample_sensing_matrix(6, 8, 51).unwrap();
    let x = scatter(8, &[2, 5], &[1.5, -0.7]);
    let u = phi.mul_vec(&x).unwrap();
    let mut raw = x.clone();
    for (j, v) in [(0, 1e-4), (1, -2e-4), (3, 3e-5), (4, 1e-5), (6, -4e-5), (7, 2e-5)] {
        raw[j] = v;
    }
    let out = debias(&raw, &phi, &u);
    let (_, c) = least_squares_on_support(&phi, &u, &[2, 5]);
    // six columns fill the rank budget, the residual is already zero on {2, 5}
    assert!(max_err(&out, &scatter(8, &[2, 5], &c)) < 1e-8);
    assert!(check_support(&x, &out));
}

#[test]
fn debias_fixed_point_and_zero() {
    let phi = sample_sensing_matrix(5, 9, 61).unwrap();
    let x = scatter(9, &[1, 4, 7], &[1.0, 2.0, -3.0]);
    let u = phi.mul_vec(&x).unwrap();
    let out = debias(&x, &phi, &u);
    assert!(max_err(&out, &x) < 1e-10);
    assert!(check_l2(&x, &out, recover_core::RecoveryCriterion::L2).unwrap());
    assert_eq!(debias(&[0.0; 9], &phi, &u), vec![0.0; 9]);
}

#[test]
fn partial_support_error_identity() {
    let phi = sample_sensing_matrix(12, 20, 71).unwrap();
    let s = [0usize, 3, 8, 13, 17];
    let x = scatter(20, &s, &[1.0, -0.5, 2.0, 0.3, -1.2]);
    let u = phi.mul_vec(&x).unwrap();
    let sub_s = [3usize, 8, 17];
    let (kept, c) = least_squares_on_support(&phi, &u, &sub_s);
    let xh = scatter(20, &kept, &c);
    let direct = norm2_sq(&sub(&x, &xh)) / norm2_sq(&x);
    // x - phi_S' phi_S'^+ phi x, viewed on the coordinates of S
    let a = phi.select_columns(&sub_s);
    let coef = least_squares(&a, &u).unwrap();
    let proj = scatter(20, &sub_s, &coef);
    let via = norm2_sq(&sub(&x, &proj)) / norm2_sq(&x);
    assert!((direct - via).abs() < 1e-10);
}

#[test]
fn single_large_entry_bound() {
    let eps = 1e-2f64;
    let s = 10usize;
    let beta = 0.1f64;
    let boundary = beta * ((1.0 - eps * eps) * (s - 1) as f64 / (eps * eps)).sqrt();
    let c = recover_core::RecoveryCriterion::L2;
    // x_hat keeps only the large entry
    let make = |alpha: f64| {
        let mut x = vec![beta; s];
        x[0] = alpha;
        let mut xh = vec![0.0; s];
        xh[0] = alpha;
        (x, xh)
    };
    let (x, xh) = make(boundary * 1.1);
    assert!(check_l2(&x, &xh, c).unwrap());
    let (x, xh) = make(boundary * 0.9);
    assert!(!check_l2(&x, &xh, c).unwrap());
}

#[test]
fn missing_one_of_hundred_unit_entries_fails_l2() {
    let x = vec![1.0; 100];
    let mut xh = x.clone();
    xh[42] = 0.0;
    assert!(!check_l2(&x, &xh, recover_core::RecoveryCriterion::L2).unwrap());
}

fn power_iteration_top(a: &DenseMatrix) -> f64 {
    let mut v = vec![1.0; a.cols()];
    for i in 0..v.len() {
        v[i] += 0.01 * i as f64;
    }
    let mut sigma = 0.0;
    for _ in 0..2000 {
        let w = a.tr_mul_vec(&a.mul_vec(&v).unwrap()).unwrap();
        let nw = norm2(&w);
        v = w.iter().map(|x| x / nw).collect();
        sigma = nw.sqrt();
    }
    sigma
}

#[test]
fn bound_check_agrees_with_power_iteration() {
    let wide = sample_sensing_matrix(20, 40, 81).unwrap();
    let b = power_iteration_top(&wide);
    assert!((singular_values(&wide)[0] - b).abs() < 1e-9 * b);
    let check = criterion_bound_check(&wide, 1e-5, 1e-2);
    assert!(check.vacuous && !check.implies_l2);

    // tall case: lower bound from power iteration on the inverse Gram spectrum
    let tall = wide.transpose();
    let svals = singular_values(&tall);
    let top = power_iteration_top(&tall);
    let gram_shift = top * top;
    // largest eigenvalue of (top^2 I - A^T A) gives top^2 - sigma_min^2
    let mut v = vec![1.0; 20];
    v[0] = 2.0;
    let mut lam = 0.0;
    for _ in 0..20000 {
        let ata = tall.tr_mul_vec(&tall.mul_vec(&v).unwrap()).unwrap();
        let w: Vec<f64> = v.iter().zip(&ata).map(|(a, b)| gram_shift * a - b).collect();
        lam = norm2(&w) / norm2(&v);
        let nw = norm2(&w);
        v = w.iter().map(|x| x / nw).collect();
    }
    let low = (gram_shift - lam).sqrt();
    assert!((svals[19] - low).abs() < 1e-6 * top, "{} vs {low}", svals[19]);
    let ratio = top / low;
    for (eu, ex) in [(1e-5, 1e-2), (1e-2, 1e-2), (1e-3, 1e-2)] {
        let c = criterion_bound_check(&tall, eu, ex);
        if (ratio * eu - ex).abs() > 1e-6 * ex {
            assert_eq!(c.implies_l2, ratio * eu <= ex, "{eu}");
        }
        assert!(!c.vacuous);
    }
    let id = criterion_bound_check(&DenseMatrix::identity(5), 1e-5, 1e-2);
    assert!(id.implies_l2);
}

#[test]
fn least_squares_recovers_coefficients() {
    let a = gaussian(4, 2, 91);
    let b = a.mul_vec(&[1.0, -2.0]).unwrap();
    let c = least_squares(&a, &b).unwrap();
    assert!(max_err(&c, &[1.0, -2.0]) < 1e-8);
}
