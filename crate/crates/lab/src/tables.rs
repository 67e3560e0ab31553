//! Derived tables: per-cell success rates, phase transitions, run summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use recover_core::evaluation::{is_monotone_nonincreasing, phase_transition, success_probability, RecoveryCriterion, TrialRecord};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::store::{sort_records, write_table, ResultStore, TRIALS_FILE};
use crate::trial::{is_failure_tag, TAG_IMPLICATION};

pub const SUCCESS_FILE: &str = "success.csv";
pub const PHASE_FILE: &str = "phase.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRow {
    pub algorithm: String,
    pub distribution: String,
    pub delta: f64,
    pub rho: f64,
    pub trials: usize,
    pub successes_l2: usize,
    pub successes_support: usize,
    pub p_l2: f64,
    pub p_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub algorithm: String,
    pub distribution: String,
    pub criterion: String,
    pub delta: f64,
    /// Empty when the curve starts below one half or a grid cell is missing.
    pub rho_half: Option<f64>,
    /// Whether the success curve is non-increasing in rho.
    pub monotone: bool,
}

type Curve = BTreeMap<u64, Vec<TrialRecord>>;

fn group(records: &[TrialRecord]) -> BTreeMap<(String, String, u64), Curve> {
    let mut out: BTreeMap<(String, String, u64), Curve> = BTreeMap::new();
    for r in records {
        out.entry((r.algorithm.clone(), r.distribution.clone(), r.delta.to_bits()))
            .or_default()
            .entry(r.rho.to_bits())
            .or_default()
            .push(r.clone());
    }
    out
}

/// Success probabilities of every nonempty cell, in table order.
pub fn success_rows(records: &[TrialRecord]) -> Vec<SuccessRow> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut rows = Vec::new();
    for ((alg, dist, delta), curve) in group(&sorted) {
        let mut cells: Vec<_> = curve.into_iter().collect();
        cells.sort_by(|a, b| f64::from_bits(a.0).total_cmp(&f64::from_bits(b.0)));
        for (rho, cell) in cells {
            let p_l2 = success_probability(&cell, RecoveryCriterion::L2).expect("nonempty cell");
            let p_support = success_probability(&cell, RecoveryCriterion::SUPPORT).expect("nonempty cell");
            rows.push(SuccessRow {
                algorithm: alg.clone(),
                distribution: dist.clone(),
                delta: f64::from_bits(delta),
                rho: f64::from_bits(rho),
                trials: cell.len(),
                successes_l2: cell.iter().filter(|r| r.success_l2).count(),
                successes_support: cell.iter().filter(|r| r.success_support).count(),
                p_l2,
                p_support,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.algorithm, &a.distribution)
            .cmp(&(&b.algorithm, &b.distribution))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.rho.total_cmp(&b.rho))
    });
    rows
}

/// Phase-transition estimates over the sparsity grid `rho_grid`.
pub fn phase_rows(success: &[SuccessRow], rho_grid: &[f64]) -> Vec<PhaseRow> {
    let mut curves: BTreeMap<(String, String, u64), BTreeMap<u64, (f64, f64)>> = BTreeMap::new();
    for s in success {
        curves
            .entry((s.algorithm.clone(), s.distribution.clone(), s.delta.to_bits()))
            .or_default()
            .insert(s.rho.to_bits(), (s.p_l2, s.p_support));
    }
    let mut rows = Vec::new();
    for ((alg, dist, delta), curve) in curves {
        for crit in [RecoveryCriterion::L2, RecoveryCriterion::SUPPORT] {
            let probs: Option<Vec<f64>> = rho_grid
                .iter()
                .map(|r| curve.get(&r.to_bits()).map(|&(l2, s)| if crit == RecoveryCriterion::L2 { l2 } else { s }))
                .collect();
            let (rho_half, monotone) = match probs {
                Some(p) => (phase_transition(rho_grid, &p).ok().flatten(), is_monotone_nonincreasing(&p)),
                None => (None, true),
            };
            rows.push(PhaseRow {
                algorithm: alg.clone(),
                distribution: dist.clone(),
                criterion: crit.id().to_string(),
                delta: f64::from_bits(delta),
                rho_half,
                monotone,
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.algorithm, &a.distribution, &a.criterion)
            .cmp(&(&b.algorithm, &b.distribution, &b.criterion))
            .then(a.delta.total_cmp(&b.delta))
    });
    rows
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), LabError> {
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(f);
    let io = |e: csv::Error| LabError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Write `success.csv` and `phase.csv` for `records` into `out`.
pub fn emit_derived(records: &[TrialRecord], rho_grid: &[f64], out: &Path) -> Result<(Vec<SuccessRow>, Vec<PhaseRow>), LabError> {
    let success = success_rows(records);
    let phase = phase_rows(&success, rho_grid);
    write_csv(
        &out.join(SUCCESS_FILE),
        &success,
        &["algorithm", "distribution", "delta", "rho", "trials", "successes_l2", "successes_support", "p_l2", "p_support"],
    )?;
    write_csv(
        &out.join(PHASE_FILE),
        &phase,
        &["algorithm", "distribution", "criterion", "delta", "rho_half", "monotone"],
    )?;
    Ok((success, phase))
}

/// Run statistics echoed into the summary.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunInfo {
    pub cells_total: usize,
    pub cells_run: usize,
    pub cells_resumed: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Serialize)]
struct NonMonotone<'a> {
    algorithm: &'a str,
    distribution: &'a str,
    criterion: &'a str,
    delta: f64,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    run: &'a RunInfo,
    trials: usize,
    failed_trials: usize,
    implication_violations: usize,
    error_tags: BTreeMap<&'a str, usize>,
    non_monotone_curves: Vec<NonMonotone<'a>>,
}

/// Write all four result files for a finished store.
pub fn emit_tables(store: &ResultStore, cfg: &ExperimentConfig, rho_grid: &[f64], run: &RunInfo, out: &Path) -> Result<(), LabError> {
    let mut records = store.records.clone();
    sort_records(&mut records);
    write_table(&out.join(TRIALS_FILE), &records)?;
    let (_, phase) = emit_derived(&records, rho_grid, out)?;
    let mut error_tags = BTreeMap::new();
    for r in &records {
        if !r.error_tag.is_empty() {
            *error_tags.entry(r.error_tag.as_str()).or_insert(0) += 1;
        }
    }
    let summary = Summary {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        run,
        trials: records.len(),
        failed_trials: records.iter().filter(|r| is_failure_tag(&r.error_tag)).count(),
        implication_violations: records.iter().filter(|r| r.error_tag == TAG_IMPLICATION).count(),
        error_tags,
        non_monotone_curves: phase
            .iter()
            .filter(|p| !p.monotone)
            .map(|p| NonMonotone {
                algorithm: &p.algorithm,
                distribution: &p.distribution,
                criterion: &p.criterion,
                delta: p.delta,
            })
            .collect(),
    };
    let path = out.join(SUMMARY_FILE);
    let f = File::create(&path).map_err(|e| LabError::io(&path, e))?;
    serde_json::to_writer_pretty(f, &summary).map_err(|e| LabError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
