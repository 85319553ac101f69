use std::fs;
use std::path::Path;
use std::process::Command;

use holdup_cli::output::{self, read_cells_csv};
use holdup_cli::{execute, expand_grid, load_config, CliError, ExecOptions, SweepSpec};
use holdup_core::exploration::PolicyKind;
use holdup_core::stats::Verdict;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn small_spec(out: &Path) -> SweepSpec {
    SweepSpec {
        lambda_s_values: vec![0.5, 10.0 / 12.0],
        gamma_values: vec![0.1, 0.5],
        discount_values: vec![0.0, 0.9],
        runs: 6,
        t_learn: 200,
        t_eval: 20,
        master_seed: 17,
        output_dir: out.to_path_buf(),
        ..SweepSpec::default()
    }
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let spec = load_config(&write(dir.path(), "empty.toml", "")).unwrap();
    assert_eq!(spec, SweepSpec::default());
    assert_eq!((spec.b, spec.mean_theta_s, spec.mean_theta_b), (12.0, 60.0, 100.0));
    assert_eq!((spec.learning_rate, spec.t_learn, spec.t_eval, spec.runs), (0.5, 1000, 100, 10_000));
    let e = spec.econ(0.5, 0.0, 0.5);
    assert_eq!((e.lambda_s, e.lambda_b), (0.5, 0.5));
    let p = spec.policy(PolicyKind::Boltzmann);
    assert_eq!((p.beta1, p.beta2, p.learn_horizon), (12487.5, 248.75, 1000));
}

#[test]
fn fractions_and_rounded_twelfths_agree() {
    let a = SweepSpec::from_toml(r#"lambda_s_values = ["5/6", 0.58, 0.5]"#).unwrap();
    assert_eq!(a.lambda_s_values, vec![5.0 / 6.0, 7.0 / 12.0, 0.5]);
    let b = SweepSpec::from_toml("lambda_s_values = [0.83]").unwrap();
    assert_eq!(b.lambda_s_values[0], a.lambda_s_values[0]);
    assert!((b.econ(b.lambda_s_values[0], 0.0, 0.1).lambda_b - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn zero_share_warns() {
    let spec = SweepSpec::from_toml("gamma_values = [0.0]").unwrap();
    assert!(spec.validate().is_ok());
    let w = spec.warnings();
    assert!(w.iter().any(|m| m.contains("no baseline comparison")), "{w:?}");
    let quiet = SweepSpec::from_toml("gamma_values = [0.1, 0.5]").unwrap();
    assert!(quiet.warnings().is_empty());
}

#[test]
fn validation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("gamma_values = [0.5, 1.5]", "gamma_values[1]"),
        ("discount_values = [1.0]", "discount_values[0]"),
        ("sd_values = [-1.0]", "sd_values[0]"),
        ("lambda_s_values = [1.2]", "lambda_s_values[0]"),
        ("lambda_s_values = [0.05]", "lambda_s_values[0]"),
        ("gamma_values = []", "gamma_values"),
        ("discount_values = [0.1, 0.1]", "discount_values[1]"),
        ("runs = 1", "runs"),
        ("learning_rate = 0.0", "learning_rate"),
        ("t_eval = 0", "t_eval"),
    ];
    for (text, field) in cases {
        match load_config(&write(dir.path(), "bad.toml", text)) {
            Err(e @ CliError::Invalid { .. }) => {
                assert_eq!(e.exit_code(), 1);
                assert!(e.to_string().contains(field), "{text}: {e}");
            }
            other => panic!("{text}: expected a validation error, got {other:?}"),
        }
    }
}

#[test]
fn syntax_and_io_errors_are_validation_failures() {
    let dir = tempfile::tempdir().unwrap();
    let typo = load_config(&write(dir.path(), "typo.toml", "gama_values = [0.5]")).unwrap_err();
    assert!(matches!(typo, CliError::ConfigSyntax { .. }));
    assert!(typo.to_string().contains("gama_values"), "{typo}");
    let broken = load_config(&write(dir.path(), "broken.toml", "runs = [")).unwrap_err();
    assert_eq!(broken.exit_code(), 1);
    let missing = load_config(&dir.path().join("nope.toml")).unwrap_err();
    assert!(matches!(missing, CliError::ConfigIo { .. }));
    assert_eq!(missing.exit_code(), 1);
}

#[test]
fn grid_sizes_and_baselines() {
    let repo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let s3 = load_config(&repo.join("scenario3.toml")).unwrap();
    let cells = expand_grid(&s3).unwrap();
    assert_eq!(cells.len(), 180);
    for c in &cells {
        let base = &cells[c.baseline];
        assert_eq!((base.lambda_s, base.sd, base.policy, base.discount), (c.lambda_s, c.sd, c.policy, c.discount));
        let expected = if c.lambda_s == 0.5 { 0.5 } else { 0.1 };
        assert_eq!(base.gamma_share, expected);
    }
    // γ varies fastest, then Γ
    assert_eq!((cells[1].gamma_share, cells[1].discount), (0.1, 0.1));
    assert_eq!((cells[10].gamma_share, cells[10].discount), (0.2, 0.0));
    let s4 = load_config(&repo.join("scenario4.toml")).unwrap();
    assert_eq!(s4.cell_count(), 4050);
    assert_eq!(expand_grid(&s4).unwrap().len(), 4050);

    let single = SweepSpec { discount_values: vec![0.3], ..SweepSpec::default() };
    let one = expand_grid(&single).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].baseline, 0);

    // Γ^sb = 0.5 is off this grid; 0.4 and 0.6 are equally close, the first wins
    let off = SweepSpec { gamma_values: vec![0.2, 0.4, 0.6], discount_values: vec![0.0], ..SweepSpec::default() };
    let cells = expand_grid(&off).unwrap();
    assert!(cells.iter().all(|c| cells[c.baseline].gamma_share == 0.4));
}

#[test]
fn sweep_writes_round_trippable_and_reproducible_outputs() {
    let root = tempfile::tempdir().unwrap();
    let a = root.path().join("a");
    let spec = small_spec(&a);
    let report = execute(&spec, &ExecOptions { jobs: Some(1), ..Default::default() }).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert_eq!(report.failed_runs, 0);
    assert!(!a.join(output::INCOMPLETE_MARKER).exists());
    for f in [output::CELLS_FILE, output::MANIFEST_FILE, output::SPEC_FILE] {
        assert!(a.join(f).is_file(), "{f}");
    }

    let parsed = read_cells_csv(&a.join(output::CELLS_FILE)).unwrap();
    assert_eq!(parsed, report.rows);
    for (p, r) in parsed.iter().zip(&report.rows) {
        assert_eq!(p.sweep_cell(), r.sweep_cell());
        assert_eq!(p.profit_mean.to_bits(), r.profit_mean.to_bits());
    }
    // every baseline cell is compared with itself
    for r in &parsed {
        if r.cell == r.baseline_cell {
            assert_eq!(r.bpi, 0.0);
            assert!(r.p_welch >= 0.5);
            assert_eq!(r.verdict, Verdict::Neither);
        }
    }

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join(output::MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest["complete"], true);
    assert_eq!(manifest["master_seed"], 17);
    assert_eq!(manifest["cells"], 8);

    // the spec echo reproduces the run, here on more threads
    let b = root.path().join("b");
    let mut again = load_config(&a.join(output::SPEC_FILE)).unwrap();
    assert_eq!(again, spec);
    again.output_dir = b.clone();
    execute(&again, &ExecOptions { jobs: Some(3), ..Default::default() }).unwrap();
    let files: Vec<_> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    assert!(files.iter().filter(|f| f.ends_with(".csv")).count() > 1);
    for f in files.iter().filter(|f| f.ends_with(".csv")) {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let c = root.path().join("c");
    execute(&SweepSpec { master_seed: 18, ..small_spec(&c) }, &ExecOptions::default()).unwrap();
    assert_ne!(fs::read(a.join(output::CELLS_FILE)).unwrap(), fs::read(c.join(output::CELLS_FILE)).unwrap());
}

#[test]
fn contour_grids_have_shares_down_and_discounts_across() {
    let root = tempfile::tempdir().unwrap();
    let spec = small_spec(root.path());
    let report = execute(&spec, &ExecOptions::default()).unwrap();
    let group = root.path().join("contours").join("ls0.8333_sd0_boltzmann");
    let text = fs::read_to_string(group.join("verdict.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma_share,0,0.9");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.1,neither,neither"));
    let profit = fs::read_to_string(group.join("profit_mean.csv")).unwrap();
    let row: Vec<f64> = profit.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let cell = report.rows.iter().find(|r| r.lambda_s > 0.8 && r.gamma_share == 0.5 && r.discount == 0.9).unwrap();
    assert_eq!(row, vec![0.5, report.rows[cell.cell - 1].profit_mean, cell.profit_mean]);
}

#[test]
fn traces_and_qtables_are_written_on_request() {
    let root = tempfile::tempdir().unwrap();
    let spec = SweepSpec {
        discount_values: vec![0.5],
        runs: 3,
        t_learn: 50,
        t_eval: 10,
        output_dir: root.path().to_path_buf(),
        ..SweepSpec::default()
    };
    let report = execute(&spec, &ExecOptions { trace_runs: 2, ..Default::default() }).unwrap();
    let trace = fs::read_to_string(root.path().join("traces/cell00000_run00001.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "t,inv_s,inv_b,theta_s,theta_b,q,profit_s,profit_b,profit_hq");
    assert_eq!(lines.len(), 61);
    let tail: f64 = lines[51..].iter().map(|l| l.split(',').nth(8).unwrap().parse::<f64>().unwrap()).sum::<f64>() / 10.0;
    let run1 = holdup_core::sim::run_episode(&expand_grid(&spec).unwrap()[0].config, 1).unwrap();
    assert!((tail - run1.mean_profit_hq).abs() < 1e-9);
    let q = fs::read_to_string(root.path().join("qtables/cell00000_run00000_buyer.csv")).unwrap();
    assert_eq!(q.lines().count(), 1 + 25 * 11);
    assert!(!root.path().join("traces/cell00000_run00002.csv").exists());
    assert_eq!(report.rows.len(), 1);
}

fn holdup(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_holdup")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let ok = holdup(&["verify-tables"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 18);

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "gamma_values = [2.0]");
    let out = holdup(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_values[0]"));

    let cfg = write(dir.path(), "tiny.toml", "discount_values = [0.0]\nt_learn = 20\nt_eval = 5\nhypothesis_tests = false\n");
    let out_dir = dir.path().join("res");
    let run = holdup(&["run", cfg.to_str().unwrap(), "--runs", "3", "--seed", "4", "--out", out_dir.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = read_cells_csv(&out_dir.join(output::CELLS_FILE)).unwrap();
    assert_eq!((rows.len(), rows[0].runs), (1, 3));
    assert!(rows[0].p_welch.is_nan());
    let summary = holdup(&["summarize", out_dir.to_str().unwrap()]);
    assert_eq!(summary.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&summary.stdout).contains("ls0.5000_sd0_boltzmann: 1 cells"));

    let zero_jobs = holdup(&["run", cfg.to_str().unwrap(), "--jobs", "0", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(zero_jobs.status.code(), Some(1));
    let no_results = holdup(&["summarize", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(no_results.status.code(), Some(2));
}
