//! CSV tables, run directories and edge-batch metadata.

use std::fs;
use std::path::{Path, PathBuf};

use edgescale_core::edge_stats::EdgeSampleBatch;
use serde::{Deserialize, Serialize};

use crate::RunError;

/// A CSV table with a header row; rendered with `,` separators and LF endings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a table written by [`Table::render`] (no quoting).
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| RunError::config("empty CSV"))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(RunError::config(format!(
                    "CSV row {} has {} fields, expected {}",
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>, RunError> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RunError::config(format!("CSV has no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|e| RunError::config(format!("bad number `{}`: {e}", r[idx])))
            })
            .collect()
    }
}

/// Provenance of an [`EdgeSampleBatch`], stored next to its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub n: usize,
    pub exponent_c: f64,
    pub center: f64,
    pub sign: f64,
    pub ensemble_tag: String,
    pub root_seed: u64,
    pub count: usize,
}

impl From<&EdgeSampleBatch> for BatchMeta {
    fn from(b: &EdgeSampleBatch) -> Self {
        Self {
            n: b.n,
            exponent_c: b.exponent_c,
            center: b.center,
            sign: b.sign,
            ensemble_tag: b.ensemble_tag.clone(),
            root_seed: b.root_seed,
            count: b.values.len(),
        }
    }
}

impl BatchMeta {
    /// Reattaches values read back from a CSV column.
    pub fn into_batch(self, values: Vec<f64>) -> Result<EdgeSampleBatch, RunError> {
        if values.len() != self.count {
            return Err(RunError::config(format!(
                "batch metadata lists {} values, CSV has {}",
                self.count,
                values.len()
            )));
        }
        let mut batch =
            EdgeSampleBatch::new(values, self.n, self.exponent_c, &self.ensemble_tag, self.root_seed)?;
        batch.center = self.center;
        batch.sign = self.sign;
        Ok(batch)
    }
}

/// Creates `<out>/<command>/<timestamp>-<seed>/`, adding a numeric suffix if
/// a run with the same name already exists.
pub fn create_run_dir(out: &Path, command: &str, seed: u64) -> Result<PathBuf, RunError> {
    let parent = out.join(command);
    fs::create_dir_all(&parent)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("{stamp}-{seed}");
    for attempt in 0..1000 {
        let name = if attempt == 0 {
            base.clone()
        } else {
            format!("{base}-{attempt}")
        };
        let dir = parent.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(RunError::Runtime(format!("could not create a run directory under {}", parent.display())))
}

/// Writes `samples.csv` and `summary.json` into a fresh run directory.
pub fn write_artifacts(
    out: &Path,
    command: &str,
    seed: u64,
    samples: &Table,
    summary: &serde_json::Value,
) -> Result<PathBuf, RunError> {
    let dir = create_run_dir(out, command, seed)?;
    fs::write(dir.join("samples.csv"), samples.render())?;
    let mut json = serde_json::to_string_pretty(summary).map_err(|e| RunError::Runtime(e.to_string()))?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(dir)
}

/// Values of one rank of a `replica,rank,value` table, in replica order.
pub fn rank_values(table: &Table, rank: usize) -> Result<Vec<f64>, RunError> {
    let ranks = table.column("rank")?;
    let values = table.column("value")?;
    Ok(ranks
        .iter()
        .zip(values)
        .filter(|(r, _)| **r as usize == rank)
        .map(|(_, v)| v)
        .collect())
}

/// Appends `replica,rank,value` rows for a batch of per-replica vectors.
pub fn push_ranked(table: &mut Table, per_replica: &[Vec<f64>]) {
    for (i, vals) in per_replica.iter().enumerate() {
        for (r, v) in vals.iter().enumerate() {
            table.push(vec![i.to_string(), r.to_string(), fmt_f64(*v)]);
        }
    }
}
