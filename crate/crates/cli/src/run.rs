//! Sweep execution.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use holdup_core::econ;
use holdup_core::sim::{self, RunResult, StepRecord};
use holdup_core::stats::{self, Verdict};
use rayon::prelude::*;

use crate::config::SweepSpec;
use crate::error::{CliError, Result};
use crate::grid::{expand_grid, Cell};
use crate::output::{self, CellRow, Manifest};

#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    /// Number of leading runs per cell whose step traces and final q-tables
    /// are written.
    pub trace_runs: usize,
    /// Print a line to stderr as each cell finishes.
    pub progress: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<CellRow>,
    pub failed_runs: usize,
    pub out_dir: PathBuf,
    pub wall_time_secs: f64,
}

/// Per-cell row from the cell's successful runs and its baseline's.
pub fn build_row(cell: &Cell, runs: &[RunResult], failures: usize, baseline: &[RunResult], tests: bool) -> Result<CellRow> {
    let profits: Vec<f64> = runs.iter().map(|r| r.mean_profit_hq).collect();
    let summary = stats::summarize(&profits)?;
    let mean = |f: fn(&RunResult) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let econ = &cell.config.econ;
    let hq_first_best = econ::first_best(econ)?.profit_hq;
    let hq_second_best = econ::second_best(econ)?.profit_hq;
    let testable = tests && runs.len() >= 2 && baseline.len() >= 2;
    let (fpi, spi, bpi, p_welch, p_wilcoxon, verdict) = if testable {
        let sc = stats::build_sweep_cell(runs, baseline, econ, cell.discount)?;
        (sc.fpi, sc.spi, sc.bpi, sc.p_welch, sc.p_wilcoxon, sc.verdict)
    } else {
        if baseline.is_empty() {
            return Err(holdup_core::Error::EmptySample("baseline").into());
        }
        let base_mean = baseline.iter().map(|r| r.mean_profit_hq).sum::<f64>() / baseline.len() as f64;
        let ind = stats::indicators(summary.mean, hq_first_best, hq_second_best, base_mean)?;
        (ind.fpi, ind.spi, ind.bpi, f64::NAN, f64::NAN, Verdict::Neither)
    };
    Ok(CellRow {
        cell: cell.index,
        baseline_cell: cell.baseline,
        lambda_s: econ.lambda_s,
        lambda_b: econ.lambda_b,
        sd: cell.sd,
        policy: cell.policy,
        gamma_share: cell.gamma_share,
        discount: cell.discount,
        seed: cell.seed(),
        runs: runs.len(),
        failures,
        inv_s_mean: mean(|r| r.mean_inv_s),
        inv_b_mean: mean(|r| r.mean_inv_b),
        profit_mean: summary.mean,
        profit_sd: summary.sd,
        profit_skewness: summary.skewness,
        hq_first_best,
        hq_second_best,
        fpi,
        spi,
        bpi,
        p_welch,
        p_wilcoxon,
        verdict,
    })
}

/// Runs every `(cell, run)` unit of `cells` on the current rayon pool.
/// Results come back per cell in run order regardless of scheduling.
pub fn run_cells(cells: &[Cell], progress: Option<&(dyn Fn(&Cell) + Sync)>) -> Vec<(Vec<RunResult>, usize)> {
    let done: Vec<AtomicUsize> = cells.iter().map(|_| AtomicUsize::new(0)).collect();
    let units: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.config.runs as u64).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<holdup_core::Result<RunResult>> = units
        .par_iter()
        .map(|&(i, r)| {
            let out = sim::run_episode(&cells[i].config, r);
            if let Some(report) = progress {
                if done[i].fetch_add(1, Ordering::Relaxed) + 1 == cells[i].config.runs {
                    report(&cells[i]);
                }
            }
            out
        })
        .collect();
    let mut per_cell: Vec<(Vec<RunResult>, usize)> = cells.iter().map(|c| (Vec::with_capacity(c.config.runs), 0)).collect();
    for (&(i, r), outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok(res) => per_cell[i].0.push(res),
            Err(e) => {
                log::error!("cell {} run {r}: {e}", cells[i].index);
                per_cell[i].1 += 1;
            }
        }
    }
    per_cell
}

fn write_trace(dir: &Path, cell: &Cell, run: u64) -> Result<Vec<PathBuf>> {
    let (_, steps, episode) = sim::run_episode_traced(&cell.config, run)?;
    let stem = format!("cell{:05}_run{:05}", cell.index, run);
    let trace_rel = Path::new("traces").join(format!("{stem}.csv"));
    let mut text = String::from(StepRecord::CSV_HEADER);
    text.push('\n');
    for s in &steps {
        text.push_str(&s.csv_row());
        text.push('\n');
    }
    let path = dir.join(&trace_rel);
    fs::write(&path, text).map_err(|e| CliError::output(&path, e))?;
    let mut written = vec![trace_rel];
    for (role, agent) in [("seller", &episode.seller), ("buyer", &episode.buyer)] {
        let rel = Path::new("qtables").join(format!("{stem}_{role}.csv"));
        let path = dir.join(&rel);
        let file = fs::File::create(&path).map_err(|e| CliError::output(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        agent.qtable.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::output(&path, e))?;
        written.push(rel);
    }
    Ok(written)
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::output(path, e))
}

/// Runs the whole sweep and writes its outputs to `spec.output_dir`.
///
/// An `INCOMPLETE` marker is written first and removed only once every file
/// is in place and no run failed.
pub fn execute(spec: &SweepSpec, opts: &ExecOptions) -> Result<Report> {
    let started = Instant::now();
    let started_unix_secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let cells = expand_grid(spec)?;
    let dir = spec.output_dir.clone();
    mkdir(&dir)?;
    let marker = dir.join(output::INCOMPLETE_MARKER);
    fs::write(&marker, "sweep started; outputs in this directory are partial until this file is removed\n")
        .map_err(|e| CliError::output(&marker, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::invalid("jobs", e.to_string()))?;
    let threads = pool.current_num_threads();
    let total = cells.len();
    let report = |c: &Cell| {
        eprintln!(
            "[{:>5}/{total}] λ_S={:.4} σ={} {} Γ={} γ={} done",
            c.index + 1,
            c.lambda_s,
            c.sd,
            c.policy,
            c.gamma_share,
            c.discount
        );
    };
    let progress: Option<&(dyn Fn(&Cell) + Sync)> = if opts.progress { Some(&report) } else { None };

    let group_len = spec.gamma_values.len() * spec.discount_values.len();
    let mut rows = Vec::with_capacity(total);
    let mut failed_runs = 0;
    let mut files = vec![PathBuf::from(output::CELLS_FILE)];
    if opts.trace_runs > 0 {
        mkdir(&dir.join("traces"))?;
        mkdir(&dir.join("qtables"))?;
    }
    for group in cells.chunks(group_len) {
        let results = pool.install(|| run_cells(group, progress));
        let offset = group[0].index;
        for (cell, (runs, failures)) in group.iter().zip(&results) {
            failed_runs += failures;
            if runs.is_empty() {
                log::error!("cell {}: every run failed, no row written", cell.index);
                continue;
            }
            let baseline = &results[cell.baseline - offset].0;
            rows.push(build_row(cell, runs, *failures, baseline, spec.hypothesis_tests)?);
            for run in 0..opts.trace_runs.min(cell.config.runs) as u64 {
                files.extend(write_trace(&dir, cell, run)?);
            }
        }
    }

    output::write_cells_csv(&dir.join(output::CELLS_FILE), &rows)?;
    files.extend(output::write_contours(&dir, &rows)?);
    output::write_json(&dir.join(output::SPEC_FILE), spec)?;
    files.push(PathBuf::from(output::SPEC_FILE));
    let wall_time_secs = started.elapsed().as_secs_f64();
    let complete = failed_runs == 0;
    let manifest = Manifest {
        tool: "holdup".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: spec.master_seed,
        cells: total,
        runs_per_cell: spec.runs,
        failed_runs,
        complete,
        started_unix_secs,
        wall_time_secs,
        threads,
        files,
        spec: spec.clone(),
    };
    output::write_json(&dir.join(output::MANIFEST_FILE), &manifest)?;
    if !complete {
        return Err(CliError::RunFailures { failed: failed_runs, total: total * spec.runs });
    }
    fs::remove_file(&marker).map_err(|e| CliError::output(&marker, e))?;
    Ok(Report { rows, failed_runs, out_dir: dir, wall_time_secs })
}
