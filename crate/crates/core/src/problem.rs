//! Problem suite: sensing matrices from the uniform spherical ensemble,
//! sparse vectors with seven coefficient laws, and measurements.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution as _, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::vector::{linspace, norm2, support};
use crate::numerics::DenseMatrix;
use crate::seed::{derive_seed, rng_from_seed};

/// Sampled nonzeros at or below this magnitude are redrawn.
pub const MAGNITUDE_FLOOR: f64 = 1e-10;

/// Law of the nonzero coefficients of a sparse vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    /// Standard normal.
    Normal,
    /// Zero-mean Laplacian with density `(rate/2) exp(-rate |x|)`.
    Laplacian { rate: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Equiprobable `{-amplitude, +amplitude}`.
    Bernoulli { amplitude: f64 },
    /// Equal mixture of `N(-mean, std^2)` and `N(mean, std^2)`.
    BimodalGaussian { mean: f64, std: f64 },
    /// Equal mixture of uniforms on `[-outer, -inner]` and `[inner, outer]`.
    BimodalUniform { inner: f64, outer: f64 },
    /// Random sign times a Rayleigh(`scale`) magnitude.
    BimodalRayleigh { scale: f64 },
}

impl DistributionSpec {
    pub const NORMAL: Self = Self::Normal;
    pub const LAPLACIAN: Self = Self::Laplacian { rate: 10.0 };
    pub const UNIFORM: Self = Self::Uniform { lo: -1.0, hi: 1.0 };
    pub const BERNOULLI: Self = Self::Bernoulli { amplitude: 1.0 };
    pub const BIMODAL_GAUSSIAN: Self = Self::BimodalGaussian { mean: 3.0, std: 1.0 };
    pub const BIMODAL_UNIFORM: Self = Self::BimodalUniform { inner: 2.0, outer: 4.0 };
    pub const BIMODAL_RAYLEIGH: Self = Self::BimodalRayleigh { scale: 3.0 };

    /// The seven laws with their default parameters.
    pub const ALL: [Self; 7] = [
        Self::NORMAL,
        Self::LAPLACIAN,
        Self::UNIFORM,
        Self::BERNOULLI,
        Self::BIMODAL_GAUSSIAN,
        Self::BIMODAL_UNIFORM,
        Self::BIMODAL_RAYLEIGH,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Laplacian { .. } => "laplacian",
            Self::Uniform { .. } => "uniform",
            Self::Bernoulli { .. } => "bernoulli",
            Self::BimodalGaussian { .. } => "bimodal-gaussian",
            Self::BimodalUniform { .. } => "bimodal-uniform",
            Self::BimodalRayleigh { .. } => "bimodal-rayleigh",
        }
    }

    /// Short label (N, L, U, B, BG, BU, BR).
    pub fn code(&self) -> &'static str {
        match self {
            Self::Normal => "N",
            Self::Laplacian { .. } => "L",
            Self::Uniform { .. } => "U",
            Self::Bernoulli { .. } => "B",
            Self::BimodalGaussian { .. } => "BG",
            Self::BimodalUniform { .. } => "BU",
            Self::BimodalRayleigh { .. } => "BR",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Normal => true,
            Self::Laplacian { rate } => rate > 0.0,
            Self::Uniform { lo, hi } => lo < hi,
            Self::Bernoulli { amplitude } => amplitude > 0.0,
            Self::BimodalGaussian { std, .. } => std > 0.0,
            Self::BimodalUniform { inner, outer } => 0.0 <= inner && inner < outer,
            Self::BimodalRayleigh { scale } => scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("distribution parameters"))
        }
    }

    /// One draw (without the magnitude rejection step).
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = |rng: &mut R| if rng.random::<bool>() { 1.0 } else { -1.0 };
        match *self {
            Self::Normal => StandardNormal.sample(rng),
            Self::Laplacian { rate } => {
                let mag: f64 = Exp::new(rate).expect("positive rate").sample(rng);
                sign(rng) * mag
            }
            Self::Uniform { lo, hi } => rng.random_range(lo..=hi),
            Self::Bernoulli { amplitude } => sign(rng) * amplitude,
            Self::BimodalGaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                sign(rng) * mean + std * z
            }
            Self::BimodalUniform { inner, outer } => sign(rng) * rng.random_range(inner..=outer),
            Self::BimodalRayleigh { scale } => {
                let u: f64 = rng.random();
                sign(rng) * scale * libm::sqrt(-2.0 * libm::log1p(-u))
            }
        }
    }

    /// Draw until the magnitude exceeds [`MAGNITUDE_FLOOR`].
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let v = self.sample_raw(rng);
            if v.abs() > MAGNITUDE_FLOOR {
                return v;
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Accepts the identifier (`bimodal-gaussian`) or the short code (`BG`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|d| d.id() == lower || d.code().eq_ignore_ascii_case(&lower))
            .ok_or(Error::InvalidParameter("unknown distribution"))
    }
}

/// One noiseless recovery problem `u = phi x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub phi: DenseMatrix,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub support: Vec<usize>,
}

impl ProblemInstance {
    /// Sense `x` with `phi`.
    pub fn new(phi: DenseMatrix, x: Vec<f64>) -> Result<Self> {
        let u = phi.mul_vec(&x)?;
        let support = support(&x);
        Ok(Self { phi, x, u, support })
    }

    /// Ambient dimension N.
    pub fn n(&self) -> usize {
        self.phi.cols()
    }

    /// Number of measurements m.
    pub fn m(&self) -> usize {
        self.phi.rows()
    }

    /// Sparsity s of the sensed vector.
    pub fn s(&self) -> usize {
        self.support.len()
    }

    /// Indeterminacy m / N.
    pub fn delta(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    pub fn measurement_norm(&self) -> f64 {
        norm2(&self.u)
    }
}

/// `m x n` matrix with i.i.d. Gaussian entries and unit-norm columns.
pub fn sample_sensing_matrix(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || m >= n {
        return Err(Error::InvalidDimensions("sensing matrix needs 1 <= m < N"));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = alloc::vec![0.0; m * n];
    let mut col = alloc::vec![0.0; m];
    for j in 0..n {
        loop {
            for c in col.iter_mut() {
                *c = StandardNormal.sample(&mut rng);
            }
            let nrm = norm2(&col);
            if nrm > 0.0 {
                for (i, c) in col.iter().enumerate() {
                    data[i * n + j] = c / nrm;
                }
                break;
            }
        }
    }
    DenseMatrix::new(m, n, data)
}

/// Length-`n` vector with exactly `s` nonzeros at uniformly random positions.
pub fn sample_sparse_vector(n: usize, s: usize, dist: DistributionSpec, seed: u64) -> Result<Vec<f64>> {
    if s == 0 || s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    dist.validate()?;
    let mut rng = rng_from_seed(seed);
    let positions = index::sample(&mut rng, n, s);
    let mut x = alloc::vec![0.0; n];
    for i in positions.iter() {
        x[i] = dist.sample(&mut rng);
    }
    Ok(x)
}

/// `(m, s)` for an ambient dimension and a point of the phase plane:
/// `m = round(delta N)`, `s = max(1, round(rho m))`, rounding half away from zero.
pub fn problem_dimensions(n: usize, delta: f64, rho: f64) -> Result<(usize, usize)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter("rho must lie in (0, 1]"));
    }
    let m = libm::round(delta * n as f64) as usize;
    if m == 0 || m >= n {
        return Err(Error::InvalidDimensions("sensing matrix needs 1 <= m < N"));
    }
    let s = (libm::round(rho * m as f64) as usize).max(1);
    Ok((m, s))
}

/// Sample a problem with sub-seeds for the matrix and vector derived from `seed`.
pub fn build_problem(n: usize, delta: f64, rho: f64, dist: DistributionSpec, seed: u64) -> Result<ProblemInstance> {
    let (m, s) = problem_dimensions(n, delta, rho)?;
    let phi = sample_sensing_matrix(m, n, derive_seed(seed, "phi", &[]))?;
    let x = sample_sparse_vector(n, s, dist, derive_seed(seed, "x", &[]))?;
    ProblemInstance::new(phi, x)
}

/// Grid of phase-plane points swept by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteGrid {
    pub n: usize,
    pub rho_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub trials: usize,
}

impl Default for SuiteGrid {
    /// N = 400, 30 sparsities in [0.05, 1], 16 indeterminacies in
    /// [0.05, 0.5414], 50 trials per cell.
    fn default() -> Self {
        Self {
            n: 400,
            rho_values: linspace(0.05, 1.0, 30),
            delta_values: linspace(0.05, 0.5414, 16),
            trials: 50,
        }
    }
}

impl SuiteGrid {
    pub fn validate(&self) -> Result<()> {
        let ascending = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        if !ascending(&self.rho_values) || !ascending(&self.delta_values) {
            return Err(Error::InvalidParameter("grid values must be nonempty and ascending"));
        }
        if self.trials == 0 || self.n < 2 {
            return Err(Error::InvalidParameter("grid needs N >= 2 and at least one trial"));
        }
        for &d in &self.delta_values {
            problem_dimensions(self.n, d, self.rho_values[0])?;
        }
        if self.rho_values.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidParameter("rho must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Spacing between consecutive sparsities (assumes a linear grid).
    pub fn rho_step(&self) -> f64 {
        match self.rho_values.len() {
            0 | 1 => 0.0,
            k => (self.rho_values[k - 1] - self.rho_values[0]) / (k - 1) as f64,
        }
    }
}
