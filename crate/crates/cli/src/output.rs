//! Result files.
//!
//! `cells.csv` holds one row per cell with the columns of [`CellRow`] in
//! declaration order. Reals are written in the shortest decimal form that
//! parses back to the same `f64`, so reading the file reproduces the
//! in-memory values bit for bit. Contour files under `contours/<group>/`
//! have Γ down the rows and γ across the columns.

use std::fs;
use std::path::{Path, PathBuf};

use holdup_core::exploration::PolicyKind;
use holdup_core::stats::{SweepCell, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::grid::GroupKey;

pub const CELLS_FILE: &str = "cells.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPEC_FILE: &str = "spec.json";
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

/// Metrics written as contour grids, one file each.
pub const CONTOUR_METRICS: [&str; 5] = ["profit_mean", "bpi", "verdict", "fpi", "spi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub cell: usize,
    pub baseline_cell: usize,
    pub lambda_s: f64,
    pub lambda_b: f64,
    pub sd: f64,
    pub policy: PolicyKind,
    pub gamma_share: f64,
    pub discount: f64,
    pub seed: u64,
    /// Successful runs.
    pub runs: usize,
    pub failures: usize,
    pub inv_s_mean: f64,
    pub inv_b_mean: f64,
    pub profit_mean: f64,
    pub profit_sd: f64,
    pub profit_skewness: f64,
    pub hq_first_best: f64,
    pub hq_second_best: f64,
    pub fpi: f64,
    pub spi: f64,
    pub bpi: f64,
    /// NaN when hypothesis tests are switched off.
    pub p_welch: f64,
    pub p_wilcoxon: f64,
    pub verdict: Verdict,
}

impl CellRow {
    pub fn sweep_cell(&self) -> SweepCell {
        SweepCell {
            gamma_share: self.gamma_share,
            discount: self.discount,
            profit_mean: self.profit_mean,
            fpi: self.fpi,
            spi: self.spi,
            bpi: self.bpi,
            p_welch: self.p_welch,
            p_wilcoxon: self.p_wilcoxon,
            verdict: self.verdict,
        }
    }

    pub fn group(&self) -> GroupKey {
        GroupKey { lambda_s: self.lambda_s, sd: self.sd, policy: self.policy }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::output(path, source),
        other => CliError::output(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_cells_csv(path: &Path, rows: &[CellRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn read_cells_csv(path: &Path) -> Result<Vec<CellRow>> {
    let results = |message: String| CliError::Results { path: path.to_path_buf(), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| results(e.to_string()))?;
    r.deserialize().map(|row| row.map_err(|e| results(e.to_string()))).collect()
}

/// Rows of consecutive cells sharing a contour group.
pub fn groups(rows: &[CellRow]) -> Vec<(GroupKey, &[CellRow])> {
    let mut out: Vec<(GroupKey, &[CellRow])> = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].group() != rows[start].group() {
            if start < i {
                out.push((rows[start].group(), &rows[start..i]));
            }
            start = i;
        }
    }
    out
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn metric_value(row: &CellRow, metric: &str) -> String {
    match metric {
        "profit_mean" => row.profit_mean.to_string(),
        "bpi" => row.bpi.to_string(),
        "fpi" => row.fpi.to_string(),
        "spi" => row.spi.to_string(),
        "verdict" => row.verdict.to_string(),
        other => unreachable!("unknown contour metric {other}"),
    }
}

/// Writes `contours/<group>/<metric>.csv` for every group; returns the
/// written paths relative to `dir`.
pub fn write_contours(dir: &Path, rows: &[CellRow]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (key, block) in groups(rows) {
        let rel_dir = Path::new("contours").join(key.label());
        let group_dir = dir.join(&rel_dir);
        fs::create_dir_all(&group_dir).map_err(|e| CliError::output(&group_dir, e))?;
        let gammas = sorted_unique(block.iter().map(|r| r.gamma_share));
        let discounts = sorted_unique(block.iter().map(|r| r.discount));
        for metric in CONTOUR_METRICS {
            let path = group_dir.join(format!("{metric}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
            let mut header = vec!["gamma_share".to_string()];
            header.extend(discounts.iter().map(|d| d.to_string()));
            w.write_record(&header).map_err(|e| csv_err(&path, e))?;
            for g in &gammas {
                let mut rec = vec![g.to_string()];
                for d in &discounts {
                    let cell = block.iter().find(|r| r.gamma_share == *g && r.discount == *d);
                    rec.push(cell.map(|r| metric_value(r, metric)).unwrap_or_default());
                }
                w.write_record(&rec).map_err(|e| csv_err(&path, e))?;
            }
            w.flush().map_err(|e| CliError::output(&path, e))?;
            written.push(rel_dir.join(format!("{metric}.csv")));
        }
    }
    Ok(written)
}

/// Run metadata. Everything except the wall-clock fields is a function of the
/// spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub cells: usize,
    pub runs_per_cell: usize,
    pub failed_runs: usize,
    pub complete: bool,
    pub started_unix_secs: u64,
    pub wall_time_secs: f64,
    pub threads: usize,
    pub files: Vec<PathBuf>,
    pub spec: crate::config::SweepSpec,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e.into()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::output(path, e))
}

/// Per-group verdict counts and significance-weighted Γ mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub key: GroupKey,
    pub cells: usize,
    pub both_significant: usize,
    pub welch_only: usize,
    pub wilcoxon_only: usize,
    pub best: Option<(f64, f64, f64)>,
    pub weighted_gamma: Option<f64>,
}

pub fn summarize_rows(rows: &[CellRow]) -> Vec<GroupSummary> {
    groups(rows)
        .into_iter()
        .map(|(key, block)| {
            let count = |v: Verdict| block.iter().filter(|r| r.verdict == v).count();
            let best = block
                .iter()
                .max_by(|a, b| a.profit_mean.total_cmp(&b.profit_mean))
                .map(|r| (r.gamma_share, r.discount, r.profit_mean));
            GroupSummary {
                key,
                cells: block.len(),
                both_significant: count(Verdict::BothSignificant),
                welch_only: count(Verdict::WelchOnly),
                wilcoxon_only: count(Verdict::WilcoxonOnly),
                best,
                weighted_gamma: holdup_core::stats::weighted_gamma_mean(
                    block.iter().map(|r| (r.gamma_share, r.bpi, r.verdict)),
                ),
            }
        })
        .collect()
}
