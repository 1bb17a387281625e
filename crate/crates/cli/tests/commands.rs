use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lapse_cli::config::ScenarioConfig;
use lapse_cli::verify::{golden_file, verify};
use lapse_cli::{scenario, tables};
use lapse_core::DEFAULT_STEP;

fn lapsecost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapsecost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

fn copy_golden(to: &Path) {
    for entry in std::fs::read_dir(golden_dir()).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

/// Adds `delta` to the Table 3 cell for phi=5, theta=10, case2 diff.
fn perturb_table3(dir: &Path, delta: f64) {
    let path = golden_file(dir, 3);
    let text = std::fs::read_to_string(&path).unwrap();
    let shifted = format!("{:.3}", -6.57 + delta);
    let text = text.replace("-2.58,-6.57,", &format!("-2.58,{shifted},"));
    std::fs::write(path, text).unwrap();
}

const BASELINE: &str = r#"
[contract]
entry_age = 35
end_age = 100
sum_insured = 250000

[pricing]
delta = 0.05
lapse_rate = 0.06
regime = "case2"

[experience]
lapse_high_risk = "differential"
mortality_multiplier = 5
sum_multiple = 10
initial_proportion = 0.001
"#;

#[test]
fn pristine_golden_files_verify() {
    let report = verify(&golden_dir(), DEFAULT_STEP).unwrap();
    assert!(report.passed(), "{}", report.render());
    assert_eq!(report.compared.len(), 5);
}

#[test]
fn perturbed_cell_fails_and_small_perturbation_passes() {
    let dir = tempfile::tempdir().unwrap();
    copy_golden(dir.path());
    perturb_table3(dir.path(), 1.0);
    let out = lapsecost(&["verify", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("table 3 row 9 column case2_diff"), "{stdout}");
    assert_eq!(stdout.matches("expected").count(), 1, "{stdout}");

    let dir = tempfile::tempdir().unwrap();
    copy_golden(dir.path());
    perturb_table3(dir.path(), 0.025);
    let report = verify(dir.path(), DEFAULT_STEP).unwrap();
    assert!(report.passed(), "{}", report.render());
}

#[test]
fn missing_golden_file_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    copy_golden(dir.path());
    std::fs::remove_file(golden_file(dir.path(), 4)).unwrap();
    let report = verify(dir.path(), DEFAULT_STEP).unwrap();
    assert!(!report.passed());
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].table, 4);
}

#[test]
fn table_output_is_byte_identical_across_runs() {
    let a = lapsecost(&["table", "5"]);
    let b = lapsecost(&["table", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# lapsecost "));
    assert!(text.lines().next().unwrap().contains("step_h=") && text.lines().next().unwrap().contains("seed="));
}

#[test]
fn table_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t6.csv");
    let out = lapsecost(&["table", "6", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lapsecost(&["table", "2"]).status.code(), Some(2));
    assert_eq!(lapsecost(&["figure", "losses", "--ages", "10:40"]).status.code(), Some(2));
    assert_eq!(lapsecost(&["figure", "losses", "--lapse", "x"]).status.code(), Some(2));
    assert_eq!(lapsecost(&["bogus"]).status.code(), Some(2));
}

#[test]
fn figure_spot_values() {
    let out = lapsecost(&["figure", "losses", "--ages", "35:35", "--lapse", "0.06"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("age,case,lapsing_mode,valuation_lapse,cost_pct"));
    assert!(text.contains("35,case2,diff,0.06,-6.57"), "{text}");
    assert_eq!(text.lines().count(), 2 + 8);
}

#[test]
fn scenario_matches_table_cell() {
    let config = ScenarioConfig::parse(BASELINE).unwrap();
    let report = scenario::run(&config).unwrap();
    let table = tables::costs(DEFAULT_STEP).unwrap();
    assert_eq!(report.cost_pct, table.number(8, "case2_diff").unwrap());
    assert!(report.summary().contains("cost_pct                   -6.57"));
}

#[test]
fn full_surrender_value_gives_equal_premiums() {
    let text = BASELINE.replace("sum_insured = 250000", "sum_insured = 250000\nsurrender = { kind = \"proportional\", k = 1.0 }");
    let report = scenario::run(&ScenarioConfig::parse(&text).unwrap()).unwrap();
    assert!((report.premium_lapse_supported / report.premium_no_lapse_support - 1.0).abs() < 1e-10);
}

#[test]
fn scenario_command_writes_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("d.csv");
    let config = dir.path().join("s.toml");
    let text = format!("{BASELINE}\n[run]\noutput_path = {:?}\nseed = 5\npaths = 20000\n", out_csv.to_str().unwrap());
    std::fs::write(&config, text).unwrap();
    let first = lapsecost(&["scenario", "run", config.to_str().unwrap()]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let csv1 = std::fs::read(&out_csv).unwrap();
    let second = lapsecost(&["scenario", "run", config.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv1, std::fs::read(&out_csv).unwrap());
    let csv = String::from_utf8(csv1).unwrap();
    assert!(csv.starts_with("# lapsecost ") && csv.lines().next().unwrap().ends_with("seed=5"));
    assert_eq!(csv.lines().count(), 2 + 66);
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.contains("simulated_sd_over_epv"));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, BASELINE.replace("end_age = 100", "end_age = 35")).unwrap();
    let out = lapsecost(&["scenario", "run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contract.end_age"));

    std::fs::write(&config, BASELINE.replace("regime = \"case2\"", "regime = 2")).unwrap();
    let out = lapsecost(&["scenario", "run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line") && stderr.contains("regime"), "{stderr}");
}

#[test]
fn worker_count_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_lapsecost"))
        .args(["table", "6"])
        .env(lapse_cli::WORKERS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_lapsecost"))
        .args(["table", "6"])
        .env(lapse_cli::WORKERS_ENV, "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}
