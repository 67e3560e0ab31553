use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::greedy::{omp_recover, promp_recover, romp_recover, stomp_recover, GreedyConfig};
use crate::problem::ProblemInstance;
use crate::relaxation::{
    bp_recover, gpsr_recover, irl1_recover, sl0_recover, GpsrConfig, Irl1Config, LpSolverConfig, Sl0Config,
};
use crate::solution::RecoverySolution;
use crate::thresholding::{
    alps_recover, amp_recover, cosamp_recover, iht_recover, ist_recover, sp_recover, tst_recover,
    ThresholdingConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Omp,
    Promp,
    Romp,
    Stomp,
    Iht,
    Ist,
    Cosamp,
    Sp,
    Tst,
    Amp,
    Alps,
    Bp,
    Irl1,
    Gpsr,
    Sl0,
}

impl Algorithm {
    pub const ALL: [Algorithm; 15] = [
        Algorithm::Omp,
        Algorithm::Promp,
        Algorithm::Romp,
        Algorithm::Stomp,
        Algorithm::Iht,
        Algorithm::Ist,
        Algorithm::Cosamp,
        Algorithm::Sp,
        Algorithm::Tst,
        Algorithm::Amp,
        Algorithm::Alps,
        Algorithm::Bp,
        Algorithm::Irl1,
        Algorithm::Gpsr,
        Algorithm::Sl0,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::Promp => "promp",
            Algorithm::Romp => "romp",
            Algorithm::Stomp => "stomp",
            Algorithm::Iht => "iht",
            Algorithm::Ist => "ist",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Sp => "sp",
            Algorithm::Tst => "tst",
            Algorithm::Amp => "amp",
            Algorithm::Alps => "alps",
            Algorithm::Bp => "bp",
            Algorithm::Irl1 => "irl1",
            Algorithm::Gpsr => "gpsr",
            Algorithm::Sl0 => "sl0",
        }
    }

    /// Whether the algorithm is told the true sparsity.
    pub fn uses_true_sparsity(&self) -> bool {
        matches!(
            self,
            Algorithm::Omp
                | Algorithm::Promp
                | Algorithm::Romp
                | Algorithm::Stomp
                | Algorithm::Cosamp
                | Algorithm::Sp
                | Algorithm::Alps
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown algorithm"))
    }
}

/// Settings for every algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgorithmConfig {
    pub greedy: GreedyConfig,
    pub thresholding: ThresholdingConfig,
    pub lp: LpSolverConfig,
    pub irl1: Irl1Config,
    pub gpsr: GpsrConfig,
    pub sl0: Sl0Config,
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<()> {
        self.greedy.validate()?;
        self.thresholding.validate()?;
        self.lp.validate()?;
        self.irl1.lp.validate()?;
        self.sl0.validate()
    }
}

/// Run `alg` on `p`. `seed` drives the randomized algorithms.
pub fn recover(alg: Algorithm, p: &ProblemInstance, cfg: &AlgorithmConfig, seed: u64) -> Result<RecoverySolution> {
    let t = &cfg.thresholding;
    Ok(match alg {
        Algorithm::Omp => omp_recover(p, &cfg.greedy),
        Algorithm::Promp => promp_recover(p, &cfg.greedy, seed),
        Algorithm::Romp => romp_recover(p, &cfg.greedy),
        Algorithm::Stomp => stomp_recover(p, &cfg.greedy),
        Algorithm::Iht => iht_recover(p, t),
        Algorithm::Ist => ist_recover(p, t),
        Algorithm::Cosamp => cosamp_recover(p, t),
        Algorithm::Sp => sp_recover(p, t),
        Algorithm::Tst => tst_recover(p, t),
        Algorithm::Amp => amp_recover(p, t),
        Algorithm::Alps => alps_recover(p, t),
        Algorithm::Bp => bp_recover(p, &cfg.lp)?,
        Algorithm::Irl1 => irl1_recover(p, &cfg.irl1)?,
        Algorithm::Gpsr => gpsr_recover(p, &cfg.gpsr),
        Algorithm::Sl0 => sl0_recover(p, &cfg.sl0)?,
    })
}
