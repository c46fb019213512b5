//! End-to-end tests of the command-line interface: exit codes, byte-level
//! determinism, and agreement between the CLI pipeline and direct library
//! calls on the same seeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

use hypertest::calibrate::{p_value, read_null_model, NullModel};
use hypertest::{build_wave_grid, lr_statistic, simulate, spectral_sample, Model, ModelConfig};

static SCRATCH_ID: AtomicU32 = AtomicU32::new(0);

/// Fresh empty directory under the system temp dir, unique per test.
fn scratch() -> PathBuf {
    let id = SCRATCH_ID.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("hypertest-cli-{}-{id}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypertest"))
        .args(args)
        .output()
        .expect("spawn hypertest binary")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Value following `key ` on the matching report line.
fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no line for key {key} in:\n{report}"))
        .to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_exit(&help, 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("Usage"));

    let version = run(&["--version"]);
    assert_exit(&version, 0);
    assert!(String::from_utf8_lossy(&version.stdout).contains(env!("CARGO_PKG_VERSION")));

    let sub_help = run(&["simulate", "--help"]);
    assert_exit(&sub_help, 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = scratch();
    let out_dir = dir.join("pats");

    let unknown_flag = run(&["simulate", "--bogus"]);
    assert_exit(&unknown_flag, 1);

    let unknown_model = run(&[
        "simulate", "--model", "grid", "--dim", "2", "--length", "10", "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&unknown_model, 1);
    assert!(String::from_utf8_lossy(&unknown_model.stderr).contains("unknown model"));

    let missing_input = run(&[
        "scatter", "--in", "/nonexistent/pattern.txt", "--out",
        path_str(&dir.join("s.csv")),
    ]);
    assert_exit(&missing_input, 1);

    let bad_dim = run(&[
        "simulate", "--model", "poisson", "--dim", "4", "--length", "10", "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&bad_dim, 1);

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn stochastic_failures_exit_two() {
    let dir = scratch();

    let saturated = run(&[
        "simulate", "--model", "rsa", "--dim", "2", "--length", "8", "--fraction", "0.9",
        "--seed", "1", "--out", path_str(&dir.join("rsa")),
    ]);
    assert_exit(&saturated, 2);
    assert!(String::from_utf8_lossy(&saturated.stderr).contains("saturation"));

    let pats = dir.join("poisson");
    assert_exit(
        &run(&[
            "simulate", "--model", "poisson", "--dim", "2", "--length", "6", "--seed", "2",
            "--out", path_str(&pats),
        ]),
        0,
    );
    let empty_grid = run(&[
        "scatter", "--in", path_str(&pats.join("rep-000000.txt")), "--out",
        path_str(&dir.join("s.csv")),
    ]);
    assert_exit(&empty_grid, 2);

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = scratch();
    let pats = dir.join("pats");
    let sim_args = [
        "simulate", "--model", "matching", "--dim", "2", "--length", "12", "--seed", "4",
        "--reps", "2", "--out", path_str(&pats),
    ];
    assert_exit(&run(&sim_args), 0);
    let rep0 = fs::read(pats.join("rep-000000.txt")).unwrap();
    let rep1 = fs::read(pats.join("rep-000001.txt")).unwrap();
    assert_ne!(rep0, rep1);
    assert_exit(&run(&sim_args), 0);
    assert_eq!(fs::read(pats.join("rep-000000.txt")).unwrap(), rep0);
    assert_eq!(fs::read(pats.join("rep-000001.txt")).unwrap(), rep1);

    let sample = dir.join("sample.csv");
    let rep0_path = pats.join("rep-000000.txt");
    let scatter_args = ["scatter", "--in", path_str(&rep0_path), "--out", path_str(&sample)];
    assert_exit(&run(&scatter_args), 0);
    let sample_bytes = fs::read(&sample).unwrap();
    assert_exit(&run(&scatter_args), 0);
    assert_eq!(fs::read(&sample).unwrap(), sample_bytes);

    let test_args = ["test", "--in", path_str(&sample)];
    let first = run(&test_args);
    assert_exit(&first, 0);
    let second = run(&test_args);
    assert_eq!(first.stdout, second.stdout);

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn cli_pipeline_matches_library_calls() {
    let dir = scratch();
    let pats = dir.join("pats");
    assert_exit(
        &run(&[
            "simulate", "--model", "url", "--dim", "2", "--length", "12", "--seed", "9",
            "--out", path_str(&pats),
        ]),
        0,
    );
    let sample_path = dir.join("sample.csv");
    assert_exit(
        &run(&["scatter", "--in", path_str(&pats.join("rep-000000.txt")), "--out",
            path_str(&sample_path)]),
        0,
    );
    let report_path = dir.join("report.txt");
    assert_exit(
        &run(&["test", "--in", path_str(&sample_path), "--verify", "--out",
            path_str(&report_path)]),
        0,
    );
    let report = fs::read_to_string(&report_path).unwrap();

    let config = ModelConfig::new(Model::Url, 2, 12.0);
    let pattern = simulate(&config, 9, 0).unwrap();
    let grid = build_wave_grid(2, 12.0, 0.75).unwrap();
    let sample = spectral_sample(&pattern, &grid).unwrap();
    let fit = lr_statistic(&sample).unwrap();
    let null = NullModel::builtin();
    let p = p_value(fit.t_stat, &null).unwrap();

    let from_file = hypertest::spectral::read_sample_path(&sample_path).unwrap();
    assert_eq!(from_file.entries(), sample.entries());

    assert_eq!(report_value(&report, "t0_hat").parse::<f64>().unwrap(), fit.t0_hat);
    assert_eq!(report_value(&report, "s_hat").parse::<f64>().unwrap(), fit.s_hat);
    assert_eq!(report_value(&report, "t1_hat").parse::<f64>().unwrap(), fit.t1_hat);
    assert_eq!(report_value(&report, "T").parse::<f64>().unwrap(), fit.t_stat);
    assert_eq!(report_value(&report, "p_value").parse::<f64>().unwrap(), p);
    assert_eq!(report_value(&report, "reject"), (p < 0.05).to_string());
    assert_eq!(report_value(&report, "null"), null.id());
    assert!(report.contains("verify negative_branch"));

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn calibrate_writes_a_null_model_the_test_accepts() {
    let dir = scratch();
    let null_path = dir.join("null.json");
    let cal = run(&[
        "calibrate", "--dim", "2", "--length", "12", "--reps", "1000", "--seed", "3",
        "--out", path_str(&null_path),
    ]);
    assert_exit(&cal, 0);
    let stdout = String::from_utf8_lossy(&cal.stdout).into_owned();
    let null = read_null_model(&null_path).unwrap();
    assert_eq!(report_value(&stdout, "p0").parse::<f64>().unwrap(), null.p0);
    assert_eq!(report_value(&stdout, "dof").parse::<f64>().unwrap(), null.dof);
    assert!(stdout.contains("written"));

    let pats = dir.join("pats");
    assert_exit(
        &run(&["simulate", "--model", "url", "--dim", "2", "--length", "12", "--seed", "5",
            "--out", path_str(&pats)]),
        0,
    );
    let sample_path = dir.join("sample.csv");
    assert_exit(
        &run(&["scatter", "--in", path_str(&pats.join("rep-000000.txt")), "--out",
            path_str(&sample_path)]),
        0,
    );
    let tested = run(&["test", "--in", path_str(&sample_path), "--null", path_str(&null_path)]);
    assert_exit(&tested, 0);
    let report = String::from_utf8_lossy(&tested.stdout).into_owned();
    assert_eq!(report_value(&report, "null"), null.id());

    let sample = hypertest::spectral::read_sample_path(&sample_path).unwrap();
    let fit = lr_statistic(&sample).unwrap();
    let p = p_value(fit.t_stat, &null).unwrap();
    assert_eq!(report_value(&report, "p_value").parse::<f64>().unwrap(), p);

    let corrupt = dir.join("corrupt.json");
    fs::write(&corrupt, "{\"p0\": 2.0}").unwrap();
    let rejected = run(&["test", "--in", path_str(&sample_path), "--null", path_str(&corrupt)]);
    assert_exit(&rejected, 1);

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn ccdf_pools_samples_and_checks_vector_index() {
    let dir = scratch();
    let pats = dir.join("pats");
    assert_exit(
        &run(&["simulate", "--model", "poisson", "--dim", "2", "--length", "12", "--seed", "6",
            "--reps", "2", "--out", path_str(&pats)]),
        0,
    );
    let (s0, s1) = (dir.join("s0.csv"), dir.join("s1.csv"));
    for (rep, out) in [("rep-000000.txt", &s0), ("rep-000001.txt", &s1)] {
        assert_exit(
            &run(&["scatter", "--in", path_str(&pats.join(rep)), "--out", path_str(out)]),
            0,
        );
    }
    let n = hypertest::spectral::read_sample_path(&s0).unwrap().len();

    let pooled = dir.join("pooled.csv");
    assert_exit(
        &run(&["ccdf", "--in", path_str(&s0), path_str(&s1), "--out", path_str(&pooled)]),
        0,
    );
    let table = fs::read_to_string(&pooled).unwrap();
    assert!(table.contains(&format!("# values {}", 2 * n)));
    assert!(table.lines().any(|l| l == "z,ccdf"));

    let fixed = dir.join("fixed.csv");
    assert_exit(
        &run(&["ccdf", "--in", path_str(&s0), path_str(&s1), "--vector", "0", "--out",
            path_str(&fixed)]),
        0,
    );
    assert!(fs::read_to_string(&fixed).unwrap().contains("# values 2"));

    let out_of_range = run(&["ccdf", "--in", path_str(&s0), "--vector", "99999", "--out",
        path_str(&dir.join("bad.csv"))]);
    assert_exit(&out_of_range, 1);

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn power_emits_a_deterministic_rate_table() {
    let dir = scratch();
    let out = dir.join("power.csv");
    let args = [
        "power", "--thin-list", "1.0,0.9", "--length-list", "12", "--reps", "20",
        "--seed", "1", "--out", path_str(&out),
    ];
    let first = run(&args);
    assert_exit(&first, 0);
    let bytes = fs::read(&out).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "s,12");
    assert_eq!(rows.len(), 3);
    for (row, p) in rows[1..].iter().zip([1.0f64, 0.9]) {
        let (s, rate) = row.split_once(',').unwrap();
        assert_eq!(s.parse::<f64>().unwrap(), 1.0 - p);
        let rate: f64 = rate.parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
    assert_eq!(String::from_utf8_lossy(&first.stdout).lines().count(), 3);

    let second = run(&args);
    assert_exit(&second, 0);
    assert_eq!(fs::read(&out).unwrap(), bytes);
    assert_eq!(first.stdout, second.stdout);

    let unsupported = run(&["power", "--model", "poisson", "--thin-list", "1.0",
        "--length-list", "12", "--out", path_str(&dir.join("x.csv"))]);
    assert_exit(&unsupported, 1);

    let _ = fs::remove_dir_all(&dir);
}
