use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use recover_core::{Algorithm, DistributionSpec};
use recover_lab::config::ExperimentConfig;
use recover_lab::store::{read_rows, TrialRow, TRIALS_FILE};
use recover_lab::tables::{emit_derived, PHASE_FILE};
use recover_lab::trial::{is_failure_tag, run_trial, CellSpec, TrialContext};
use recover_lab::{run_suite, LabError, RunOptions};

#[derive(Parser)]
#[command(name = "recover-lab", version, about = "Phase-transition sweeps for sparse recovery algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides `worker_count`).
        #[arg(long)]
        workers: Option<usize>,
        /// Keep complete cells from an interrupted run in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Recompute success.csv and phase.csv from a results directory.
    Phase {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run one trial and print its record as JSON.
    Single {
        #[arg(long)]
        algo: String,
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

fn run(cfg_path: PathBuf, out: Option<PathBuf>, workers: Option<usize>, resume: bool) -> Result<ExitCode, LabError> {
    let mut cfg = ExperimentConfig::load(&cfg_path)?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    if let Some(w) = workers {
        cfg.worker_count = w;
    }
    let report = run_suite(&cfg, &RunOptions { resume, max_cells: None })?;
    eprintln!(
        "{} cells ({} resumed), {} trials, {} failed, {:.1}s -> {}",
        report.info.cells_total,
        report.info.cells_resumed,
        report.store.records.len(),
        report.failed_trials,
        report.info.elapsed_s,
        report.output_dir.display()
    );
    Ok(if report.failed_trials > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn phase(dir: PathBuf) -> Result<ExitCode, LabError> {
    let rows = read_rows(&dir.join(TRIALS_FILE))?;
    let mut deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let mut rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    for v in [&mut deltas, &mut rhos] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let index = |v: &[f64], x: f64| v.binary_search_by(|p| p.total_cmp(&x)).expect("value present");
    let records: Vec<_> = rows
        .into_iter()
        .map(|r| {
            let (di, ri) = (index(&deltas, r.delta), index(&rhos, r.rho));
            r.into_record(di, ri)
        })
        .collect();
    let (_, phase) = emit_derived(&records, &rhos, &dir)?;
    println!("algorithm,distribution,criterion,delta,rho_half");
    for p in &phase {
        let half = p.rho_half.map(|v| format!("{v:.4}")).unwrap_or_default();
        println!("{},{},{},{},{}", p.algorithm, p.distribution, p.criterion, p.delta, half);
    }
    eprintln!("wrote {}", dir.join(PHASE_FILE).display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn single(algo: &str, dist: &str, n: usize, delta: f64, rho: f64, seed: u64, trial: usize) -> Result<ExitCode, LabError> {
    let algorithm: Algorithm = algo.parse().map_err(|_| LabError::Config(format!("unknown algorithm `{algo}`")))?;
    let distribution: DistributionSpec = dist.parse().map_err(|_| LabError::Config(format!("unknown distribution `{dist}`")))?;
    recover_core::problem::problem_dimensions(n, delta, rho).map_err(|e| LabError::Config(e.to_string()))?;
    let cell = CellSpec {
        algorithm,
        distribution,
        n,
        delta,
        rho,
        delta_index: 0,
        rho_index: 0,
    };
    let record = run_trial(&TrialContext::new(seed), &cell, trial);
    let json = serde_json::to_string_pretty(&TrialRow::from(&record)).expect("record serializes");
    println!("{json}");
    Ok(if is_failure_tag(&record.error_tag) { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, workers, resume } => run(config, out, workers, resume),
        Command::Phase { input } => phase(input),
        Command::Single { algo, dist, n, delta, rho, seed, trial } => single(&algo, &dist, n, delta, rho, seed, trial),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("recover-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
