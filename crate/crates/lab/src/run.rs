//! Sweeping the phase plane.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use recover_core::TrialRecord;

use crate::config::{ExperimentConfig, ResolvedConfig};
use crate::error::LabError;
use crate::store::{CellKey, Journal, ResultStore};
use crate::tables::{emit_tables, RunInfo};
use crate::trial::{is_failure_tag, run_trial, CellSpec, TrialContext};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Reuse complete cells from an earlier, interrupted run in the same directory.
    pub resume: bool,
    /// Stop after this many new cells, leaving the run incomplete.
    pub max_cells: Option<usize>,
}

#[derive(Debug)]
pub struct RunReport {
    pub store: ResultStore,
    pub info: RunInfo,
    pub output_dir: PathBuf,
    /// False when stopped early by `max_cells`; no tables are written then.
    pub complete: bool,
    pub failed_trials: usize,
}

/// All cells of the sweep, in canonical order.
pub fn enumerate_cells(r: &ResolvedConfig) -> Vec<CellSpec> {
    let mut cells = Vec::new();
    for &algorithm in &r.algorithms {
        for &distribution in &r.distributions {
            for (delta_index, &delta) in r.grid.delta_values.iter().enumerate() {
                for (rho_index, &rho) in r.grid.rho_values.iter().enumerate() {
                    cells.push(CellSpec {
                        algorithm,
                        distribution,
                        n: r.grid.n,
                        delta,
                        rho,
                        delta_index,
                        rho_index,
                    });
                }
            }
        }
    }
    cells
}

fn key_of(c: &CellSpec) -> CellKey {
    (
        c.algorithm.id().to_string(),
        c.distribution.id().to_string(),
        c.delta.to_bits(),
        c.rho.to_bits(),
    )
}

pub fn context(cfg: &ExperimentConfig, r: &ResolvedConfig) -> TrialContext {
    TrialContext {
        master_seed: cfg.master_seed,
        phi_policy: cfg.phi_policy,
        algorithms: r.algorithm_config,
        epsilon_x: r.epsilon_x,
        record_timing: cfg.record_timing,
    }
}

pub fn run_cell(ctx: &TrialContext, cell: &CellSpec, trials: usize) -> Vec<TrialRecord> {
    (0..trials).map(|t| run_trial(ctx, cell, t)).collect()
}

/// Execute every `(algorithm, distribution, delta, rho, trial)` of the
/// configuration and write the result tables to `cfg.output_dir`.
pub fn run_suite(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, LabError> {
    let resolved = cfg.resolve()?;
    let started = Instant::now();
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| LabError::io(&out, e))?;
    let cells = enumerate_cells(&resolved);
    let trials = resolved.grid.trials;
    let ctx = context(cfg, &resolved);

    let mut store = ResultStore::default();
    let journal = if opts.resume {
        let expected: BTreeMap<CellKey, usize> = cells.iter().map(|c| (key_of(c), trials)).collect();
        let (journal, rows) = Journal::recover(&out, &expected)?;
        let index: BTreeMap<CellKey, &CellSpec> = cells.iter().map(|c| (key_of(c), c)).collect();
        let mut by_cell: BTreeMap<CellKey, Vec<TrialRecord>> = BTreeMap::new();
        for row in rows {
            let key = (row.algorithm.clone(), row.distribution.clone(), row.delta.to_bits(), row.rho.to_bits());
            let spec = index[&key];
            by_cell.entry(key).or_default().push(row.into_record(spec.delta_index, spec.rho_index));
        }
        by_cell.into_values().for_each(|c| store.insert_cell(c));
        journal
    } else {
        Journal::create(&out)?
    };
    let resumed = store.completed.len();
    let mut pending: Vec<&CellSpec> = cells.iter().filter(|c| !store.is_complete(&key_of(c))).collect();
    let complete = match opts.max_cells {
        Some(k) if k < pending.len() => {
            pending.truncate(k);
            false
        }
        _ => true,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| LabError::Config(format!("worker pool: {e}")))?;
    let journal = Mutex::new(journal);
    let finished: Mutex<Vec<Vec<TrialRecord>>> = Mutex::new(Vec::new());
    let io_error: Mutex<Option<LabError>> = Mutex::new(None);
    pool.install(|| {
        pending.par_iter().for_each(|cell| {
            if io_error.lock().expect("lock").is_some() {
                return;
            }
            let records = run_cell(&ctx, cell, trials);
            if let Err(e) = journal.lock().expect("lock").append_cell(&records) {
                io_error.lock().expect("lock").get_or_insert(e);
                return;
            }
            finished.lock().expect("lock").push(records);
        })
    });
    if let Some(e) = io_error.into_inner().expect("lock") {
        return Err(e);
    }
    let new_cells = finished.into_inner().expect("lock");
    let info = RunInfo {
        cells_total: cells.len(),
        cells_run: new_cells.len(),
        cells_resumed: resumed,
        elapsed_s: started.elapsed().as_secs_f64(),
    };
    new_cells.into_iter().for_each(|c| store.insert_cell(c));
    let store = store.sorted();
    if complete {
        emit_tables(&store, cfg, &resolved.grid.rho_values, &info, &out)?;
    }
    let failed_trials = store.records.iter().filter(|r| is_failure_tag(&r.error_tag)).count();
    Ok(RunReport {
        store,
        info,
        output_dir: out,
        complete,
        failed_trials,
    })
}
