//! Trial tables on disk and the append-only journal used for resuming.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use recover_core::TrialRecord;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const TRIALS_FILE: &str = "trials.csv";
pub const JOURNAL_FILE: &str = "trials.journal.csv";

/// One row of `trials.csv`; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub algorithm: String,
    pub distribution: String,
    pub delta: f64,
    pub rho: f64,
    pub trial: usize,
    pub seed: u64,
    pub success_l2: bool,
    pub success_support: bool,
    pub residual_norm: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub error_tag: String,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            algorithm: r.algorithm.clone(),
            distribution: r.distribution.clone(),
            delta: r.delta,
            rho: r.rho,
            trial: r.trial,
            seed: r.seed,
            success_l2: r.success_l2,
            success_support: r.success_support,
            residual_norm: r.residual_norm,
            iterations: r.iterations,
            wall_time_s: r.wall_time_s,
            error_tag: r.error_tag.clone(),
        }
    }
}

impl TrialRow {
    /// Grid indices are not stored on disk; the caller supplies them.
    pub fn into_record(self, delta_index: usize, rho_index: usize) -> TrialRecord {
        TrialRecord {
            algorithm: self.algorithm,
            distribution: self.distribution,
            delta: self.delta,
            rho: self.rho,
            delta_index,
            rho_index,
            trial: self.trial,
            seed: self.seed,
            success_l2: self.success_l2,
            success_support: self.success_support,
            residual_norm: self.residual_norm,
            iterations: self.iterations,
            wall_time_s: self.wall_time_s,
            error_tag: self.error_tag,
        }
    }
}

/// `(algorithm, distribution, delta bits, rho bits)`
pub type CellKey = (String, String, u64, u64);

pub fn cell_key(r: &TrialRecord) -> CellKey {
    (r.algorithm.clone(), r.distribution.clone(), r.delta.to_bits(), r.rho.to_bits())
}

/// Canonical order: algorithm, distribution, delta, rho, trial.
pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then_with(|| a.distribution.cmp(&b.distribution))
            .then_with(|| a.delta.total_cmp(&b.delta))
            .then_with(|| a.rho.total_cmp(&b.rho))
            .then_with(|| a.trial.cmp(&b.trial))
    });
}

/// Records plus the set of cells whose trials are all present.
#[derive(Debug, Clone, Default)]
pub struct ResultStore {
    pub records: Vec<TrialRecord>,
    pub completed: BTreeSet<CellKey>,
}

impl ResultStore {
    pub fn insert_cell(&mut self, cell: Vec<TrialRecord>) {
        if let Some(first) = cell.first() {
            self.completed.insert(cell_key(first));
        }
        self.records.extend(cell);
    }

    pub fn is_complete(&self, key: &CellKey) -> bool {
        self.completed.contains(key)
    }

    pub fn sorted(mut self) -> Self {
        sort_records(&mut self.records);
        self
    }
}

pub fn write_rows<W: Write>(out: W, records: &[TrialRecord], header: bool) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
    for r in records {
        w.serialize(TrialRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path, io),
        other => LabError::Format {
            path: path.display().to_string(),
            message: format!("{other:?}"),
        },
    }
}

/// Write a complete table with header, via a temporary file and rename.
pub fn write_table(path: &Path, records: &[TrialRecord]) -> Result<(), LabError> {
    let tmp = path.with_extension("csv.tmp");
    let f = File::create(&tmp).map_err(|e| LabError::io(&tmp, e))?;
    write_rows(f, records, true).map_err(|e| csv_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| LabError::io(path, e))
}

pub fn read_rows(path: &Path) -> Result<Vec<TrialRow>, LabError> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::Reader::from_reader(f);
    let expected = csv::StringRecord::from(HEADER.to_vec());
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers != expected {
        return Err(LabError::Format {
            path: path.display().to_string(),
            message: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub const HEADER: [&str; 12] = [
    "algorithm",
    "distribution",
    "delta",
    "rho",
    "trial",
    "seed",
    "success_l2",
    "success_support",
    "residual_norm",
    "iterations",
    "wall_time_s",
    "error_tag",
];

/// Append-only log of finished cells. Each cell is written in one piece and
/// flushed, so after a crash at most the last cell is incomplete.
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Start a fresh journal, replacing any existing one.
    pub fn create(dir: &Path) -> Result<Self, LabError> {
        let path = dir.join(JOURNAL_FILE);
        let mut file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
        writeln!(file, "{}", HEADER.join(",")).map_err(|e| LabError::io(&path, e))?;
        Ok(Self { path, file })
    }

    /// Keep only the complete cells of an existing journal and reopen it for
    /// appending. `expected` gives the trial count of every cell of the
    /// current run; records for other cells are discarded.
    pub fn recover(dir: &Path, expected: &BTreeMap<CellKey, usize>) -> Result<(Self, Vec<TrialRow>), LabError> {
        let path = dir.join(JOURNAL_FILE);
        if !path.exists() {
            return Ok((Self::create(dir)?, Vec::new()));
        }
        let rows = read_journal_lenient(&path)?;
        let mut by_cell: BTreeMap<CellKey, BTreeMap<usize, TrialRow>> = BTreeMap::new();
        for row in rows {
            let key = (row.algorithm.clone(), row.distribution.clone(), row.delta.to_bits(), row.rho.to_bits());
            by_cell.entry(key).or_default().insert(row.trial, row);
        }
        let mut kept = Vec::new();
        for (key, trials) in by_cell {
            let Some(&want) = expected.get(&key) else { continue };
            if trials.len() == want && trials.keys().copied().eq(0..want) {
                kept.extend(trials.into_values());
            }
        }
        let tmp = dir.join(format!("{JOURNAL_FILE}.tmp"));
        {
            let f = File::create(&tmp).map_err(|e| LabError::io(&tmp, e))?;
            let mut w = csv::Writer::from_writer(f);
            w.write_record(HEADER).map_err(|e| csv_err(&tmp, e))?;
            for r in &kept {
                w.serialize(r).map_err(|e| csv_err(&tmp, e))?;
            }
            w.flush().map_err(|e| LabError::io(&tmp, e))?;
        }
        std::fs::rename(&tmp, &path).map_err(|e| LabError::io(&path, e))?;
        let file = OpenOptions::new().append(true).open(&path).map_err(|e| LabError::io(&path, e))?;
        Ok((Self { path, file }, kept))
    }

    pub fn append_cell(&mut self, records: &[TrialRecord]) -> Result<(), LabError> {
        let mut buf = Vec::new();
        write_rows(&mut buf, records, false).map_err(|e| csv_err(&self.path, e))?;
        self.file.write_all(&buf).map_err(|e| LabError::io(&self.path, e))?;
        self.file.flush().map_err(|e| LabError::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Rows of a journal, skipping a torn final line.
fn read_journal_lenient(path: &Path) -> Result<Vec<TrialRow>, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        // A line without its terminator was cut short by a crash.
        let Some(line) = line.strip_suffix('\n') else { continue };
        if i == 0 || line.is_empty() {
            continue;
        }
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let mut rec = csv::StringRecord::new();
        if !matches!(r.read_record(&mut rec), Ok(true)) || rec.len() != HEADER.len() {
            continue;
        }
        if let Ok(row) = rec.deserialize::<TrialRow>(Some(&csv::StringRecord::from(HEADER.to_vec()))) {
            rows.push(row);
        }
    }
    Ok(rows)
}
