//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use recover_core::numerics::vector::linspace;
use recover_core::{Algorithm, AlgorithmConfig, DistributionSpec, SuiteGrid};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhiPolicy {
    /// One sensing matrix shared by all trials of a cell.
    #[default]
    PerCell,
    /// A fresh sensing matrix for every trial.
    PerTrial,
}

/// Linearly spaced values, `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Either an explicit list or a linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    Values(Vec<f64>),
    Range(Linspace),
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridAxis::Values(v) => v.clone(),
            GridAxis::Range(r) => linspace(r.start, r.stop, r.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rho")]
    pub rho_values: GridAxis,
    #[serde(default = "default_delta")]
    pub delta_values: GridAxis,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for SuiteSection {
    fn default() -> Self {
        Self {
            n: default_n(),
            rho_values: default_rho(),
            delta_values: default_delta(),
            trials: default_trials(),
        }
    }
}

fn default_n() -> usize {
    400
}

fn default_trials() -> usize {
    50
}

fn default_rho() -> GridAxis {
    GridAxis::Range(Linspace { start: 0.05, stop: 1.0, count: 30 })
}

fn default_delta() -> GridAxis {
    GridAxis::Range(Linspace { start: 0.05, stop: 0.5414, count: 16 })
}

/// Tolerances of the two recovery criteria and the residual stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaSection {
    /// Relative ℓ2 error allowed by the ℓ2 criterion.
    #[serde(default = "default_eps_x")]
    pub epsilon_x: f64,
    /// Relative residual at which the iterative algorithms stop.
    #[serde(default = "default_eps_u")]
    pub epsilon_u: f64,
}

impl Default for CriteriaSection {
    fn default() -> Self {
        Self {
            epsilon_x: default_eps_x(),
            epsilon_u: default_eps_u(),
        }
    }
}

fn default_eps_x() -> f64 {
    1e-2
}

fn default_eps_u() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub suite: SuiteSection,
    pub algorithms: Vec<String>,
    pub distributions: Vec<String>,
    #[serde(default)]
    pub criteria: CriteriaSection,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
    #[serde(default)]
    pub phi_policy: PhiPolicy,
    /// Write measured wall times; when false they are written as 0 so that
    /// output files are byte-identical across runs.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_workers() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// Configuration after identifiers have been resolved.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub grid: SuiteGrid,
    pub algorithms: Vec<Algorithm>,
    pub distributions: Vec<DistributionSpec>,
    pub algorithm_config: AlgorithmConfig,
    pub epsilon_x: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, LabError> {
        let bad = |m: String| LabError::Config(m);
        if self.algorithms.is_empty() || self.distributions.is_empty() {
            return Err(bad("algorithms and distributions must be nonempty".into()));
        }
        if self.worker_count == 0 {
            return Err(bad("worker_count must be at least 1".into()));
        }
        let mut algorithms = Vec::new();
        for a in &self.algorithms {
            let alg: Algorithm = a.parse().map_err(|_| bad(format!("unknown algorithm `{a}`")))?;
            if algorithms.contains(&alg) {
                return Err(bad(format!("algorithm `{a}` listed twice")));
            }
            algorithms.push(alg);
        }
        let mut distributions = Vec::new();
        for d in &self.distributions {
            let dist: DistributionSpec = d.parse().map_err(|_| bad(format!("unknown distribution `{d}`")))?;
            if distributions.contains(&dist) {
                return Err(bad(format!("distribution `{d}` listed twice")));
            }
            distributions.push(dist);
        }
        let grid = SuiteGrid {
            n: self.suite.n,
            rho_values: self.suite.rho_values.values(),
            delta_values: self.suite.delta_values.values(),
            trials: self.suite.trials,
        };
        grid.validate().map_err(|e| bad(format!("suite: {e}")))?;
        let c = self.criteria;
        if !(c.epsilon_x > 0.0) || !(c.epsilon_u > 0.0) {
            return Err(bad("criteria tolerances must be positive".into()));
        }
        let mut algorithm_config = AlgorithmConfig::default();
        algorithm_config.greedy.residual_tol = c.epsilon_u;
        algorithm_config.thresholding.residual_tol = c.epsilon_u;
        algorithm_config.validate().map_err(|e| bad(e.to_string()))?;
        Ok(ResolvedConfig {
            grid,
            algorithms,
            distributions,
            algorithm_config,
            epsilon_x: c.epsilon_x,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml("algorithms = [\"omp\"]\ndistributions = [\"B\"]\n").unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.grid, SuiteGrid::default());
        assert_eq!(cfg.phi_policy, PhiPolicy::PerCell);
        assert!(cfg.record_timing);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml("algorithms = [\"omp\"]\ndistributions = [\"B\"]\nworkers = 2\n");
        assert!(matches!(err, Err(LabError::Config(_))));
        let err = ExperimentConfig::from_toml("algorithms = [\"omp\"]\ndistributions = [\"B\"]\n[suite]\nN = 10\n");
        assert!(matches!(err, Err(LabError::Config(_))));
    }

    #[test]
    fn explicit_and_ranged_axes() {
        let text = "algorithms = [\"bp\"]\ndistributions = [\"normal\"]\n[suite]\nn = 50\ntrials = 2\n\
                    delta_values = [0.2, 0.4]\nrho_values = { start = 0.1, stop = 0.3, count = 3 }\n";
        let r = ExperimentConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(r.grid.delta_values, vec![0.2, 0.4]);
        assert_eq!(r.grid.rho_values.len(), 3);
    }

    #[test]
    fn unknown_algorithm_is_config_error() {
        let cfg = ExperimentConfig::from_toml("algorithms = [\"lasso\"]\ndistributions = [\"B\"]\n").unwrap();
        assert!(matches!(cfg.resolve(), Err(LabError::Config(_))));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml("algorithms = [\"omp\", \"sl0\"]\ndistributions = [\"L\"]\nmaster_seed = 9\n").unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
