use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use holdup_cli::output::{self, GroupSummary};
use holdup_cli::tables;
use holdup_cli::{execute, load_config, CliError, ExecOptions};

#[derive(Parser)]
#[command(name = "holdup", version, about = "Fuzzy Q-learning hold-up simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Override the number of runs per cell.
        #[arg(long)]
        runs: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write step traces and q-tables for the first N runs of each cell.
        #[arg(long, num_args = 0..=1, default_missing_value = "1", value_name = "N")]
        trace: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// No per-cell progress lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Check the closed-form solutions against the published table.
    VerifyTables,
    /// Print verdict counts per contour group of a finished sweep.
    Summarize { dir: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, runs, seed, jobs, trace, out, quiet } => {
            let mut spec = load_config(&config)?;
            if let Some(r) = runs {
                spec.runs = r;
            }
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            if let Some(o) = out {
                spec.output_dir = o;
            }
            spec.validate()?;
            if jobs == Some(0) {
                return Err(CliError::Invalid { field: "jobs".into(), reason: "must be at least 1".into() });
            }
            eprintln!(
                "{} cells x {} runs, seed {}, writing to {}",
                spec.cell_count(),
                spec.runs,
                spec.master_seed,
                spec.output_dir.display()
            );
            let opts = ExecOptions { jobs, trace_runs: trace.unwrap_or(0), progress: !quiet };
            let report = execute(&spec, &opts)?;
            eprintln!("finished in {:.1} s", report.wall_time_secs);
            print_summary(&output::summarize_rows(&report.rows));
            Ok(())
        }
        Command::VerifyTables => {
            let start = Instant::now();
            let checks = tables::verify_tables()?;
            println!("{}", tables::header());
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passes()).count();
            println!(
                "{}/{} rows within {} ({:.1} ms)",
                checks.len() - failed,
                checks.len(),
                tables::TABLE_TOLERANCE,
                start.elapsed().as_secs_f64() * 1e3
            );
            if failed > 0 {
                return Err(CliError::TableMismatch(failed));
            }
            Ok(())
        }
        Command::Summarize { dir } => {
            let rows = output::read_cells_csv(&dir.join(output::CELLS_FILE))?;
            if Path::new(&dir).join(output::INCOMPLETE_MARKER).exists() {
                eprintln!("warning: {} is marked incomplete", dir.display());
            }
            print_summary(&output::summarize_rows(&rows));
            Ok(())
        }
    }
}

fn print_summary(groups: &[GroupSummary]) {
    for g in groups {
        let best = g
            .best
            .map(|(gs, d, p)| format!("best Π_HQ {p:.2} at Γ={gs} γ={d}"))
            .unwrap_or_default();
        let weighted = g.weighted_gamma.map(|w| format!("{w:.3}")).unwrap_or_else(|| "n/a".to_string());
        println!(
            "{}: {} cells, both {} / welch only {} / rank-sum only {}, weighted Γ {}, {}",
            g.key.label(),
            g.cells,
            g.both_significant,
            g.welch_only,
            g.wilcoxon_only,
            weighted,
            best
        );
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
