//! End-to-end tests of the binary: exit-code contract, dry runs, suite
//! selection and artifact layout.

use std::path::Path;
use std::process::Output;

fn run_cli(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_mixingale"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const PASSING: &str = r#"
[process]
kind = "independent-innovations"
horizon = 6

[schedule]
n_grid = [2, 6]
m_grid = [1, 2]
b_grid = [1.0, 2.0]
decay_threshold = 0.5

[run]
seed = 5
"#;

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PASSING);
    let out = dir.path().join("results");
    let output = run_cli(&[&config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("result: PASS (6/6 suites passed)"),
        "{stdout}"
    );

    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("# mixingale trace schema v1"), "{csv}");
    assert!(csv.contains("cesaro-mean"));
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("suite wlln: PASS"));
}

#[test]
fn undersized_phi_fails_the_mixingale_suite_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[process]
kind = "moving-average"
horizon = 6
coefficients = [1.0, 0.5]

[certificate]
mode = "explicit"
phi = [0.4]
phi_tail_zero = true

[schedule]
n_grid = [2, 6]
m_grid = [1, 2]
b_grid = [1.0, 2.0]
decay_threshold = 0.5
"#,
    );
    let out = dir.path().join("results");
    let output = run_cli(&[&config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("suite mixingale: FAIL"), "{stdout}");
    // The report names the offending (i, m) and side.
    assert!(stdout.contains("side past"), "{stdout}");
    assert!(stdout.contains("(i, m) = (2, 1)"), "{stdout}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown key, with the expected fields suggested.
    let config = write_config(
        dir.path(),
        r#"
[process]
kind = "independent-innovations"
horizon = 4
phii = [0.5]
"#,
    );
    let output = run_cli(&[&config]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("phii"), "{stderr}");
    assert!(stderr.contains("expected"), "{stderr}");

    // Decreasing grid.
    let config = write_config(
        dir.path(),
        r#"
[process]
kind = "independent-innovations"
horizon = 8

[schedule]
n_grid = [8, 4]
"#,
    );
    let output = run_cli(&[&config]);
    assert_eq!(output.status.code(), Some(2));

    // Missing file.
    let output = run_cli(&[dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn atom_cap_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[process]
kind = "independent-innovations"
horizon = 30

[schedule]
n_grid = [4, 16]
"#,
    );
    let output = run_cli(&[&config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("monte-carlo"), "{stderr}");

    // The env override raises the cap; 2^10 fits under 2048.
    let config = write_config(
        dir.path(),
        r#"
[process]
kind = "independent-innovations"
horizon = 10

[schedule]
n_grid = [4, 10]
m_grid = [1]
b_grid = [2.0]
decay_threshold = 0.5
"#,
    );
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_mixingale"))
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("o2"))
        .env("MIXINGALE_ATOM_CAP", "512")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_mixingale"))
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("o3"))
        .env("MIXINGALE_ATOM_CAP", "2048")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}

#[test]
fn dry_run_echoes_config_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PASSING);
    let out = dir.path().join("results");
    let output = run_cli(&[&config, "--out", out.to_str().unwrap(), "--dry-run"]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("dry run"), "{stdout}");
    assert!(stdout.contains("independent-innovations"), "{stdout}");
    assert!(!out.exists(), "dry run must not write artifacts");
}

#[test]
fn suite_selection_runs_requested_suites_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PASSING);
    let out = dir.path().join("results");
    let output = run_cli(&[
        &config,
        "--out",
        out.to_str().unwrap(),
        "--suite",
        "wlln",
        "--suite",
        "lattice-axioms",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let axioms = stdout.find("suite lattice-axioms").unwrap();
    let wlln = stdout.find("suite wlln").unwrap();
    assert!(
        axioms < wlln,
        "dependency order regardless of request order"
    );
    assert!(!stdout.contains("suite filtration"));

    let output = run_cli(&[&config, "--suite", "bogus"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn backend_and_seed_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), PASSING);
    let out = dir.path().join("results");
    let output = run_cli(&[
        &config,
        "--out",
        out.to_str().unwrap(),
        "--backend",
        "monte-carlo",
        "--seed",
        "99",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("backend: monte-carlo"), "{stdout}");
    assert!(stdout.contains("check seed: 99"), "{stdout}");
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.contains("monte-carlo"));
}
