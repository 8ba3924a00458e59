use std::fs;
use std::process::{Command, Output};

use appruss::experiment::parse_csv;

const BIN: &str = env!("CARGO_BIN_EXE_appruss");
const SCENARIOS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");

fn appruss(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("APPRUSS_SEED")
        .output()
        .unwrap()
}

fn fig5() -> String {
    format!("{SCENARIOS}/paper_fig5.json")
}

#[test]
fn plan_writes_sampled_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = appruss(&["plan", "--scenario", &fig5(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,z"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.len() == 3));
    assert_eq!(rows[0], vec![0.4, 0.0, 0.0]);
}

#[test]
fn run_prints_json_result() {
    let o = appruss(&["run", "--scenario", &fig5(), "--condition", "with", "--seed", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["success"].is_boolean());
    assert!(v["moving_time"].as_f64().unwrap() >= 0.0);
    assert!(v["failure_reason"].is_string());
}

#[test]
fn bench_csv_with_rep_override() {
    let o = appruss(&["--reps", "2", "bench", "--suite", &fig5(), "--format", "csv"]);
    assert!(o.status.success());
    let rows = parse_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.n_total == 2));
}

#[test]
fn bench_table_has_footnote() {
    let o = appruss(&["bench", "--suite", &fig5()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("Scenario"));
    assert!(text.contains("With Planning") && text.contains("Without Planning"));
    assert!(text.contains("successful runs only"));
}

#[test]
fn bad_files_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    let zero_reps = dir.path().join("zero.json");
    fs::write(&zero_reps, r#"{"source": [1, 0, 0], "target": [0, 0, 1], "repetitions": 0}"#).unwrap();
    for path in [&garbage, &zero_reps] {
        let o = appruss(&["bench", "--suite", path.to_str().unwrap()]);
        assert!(!o.status.success());
    }
    let o = appruss(&["bench", "--suite", zero_reps.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("repetitions"));
    let o = appruss(&["bench", "--suite", "/nonexistent/suite.json"]);
    assert!(!o.status.success());
}

#[test]
fn invalid_seed_variable_is_rejected() {
    let o = Command::new(BIN)
        .args(["bench", "--suite", &fig5()])
        .env("APPRUSS_SEED", "not-a-number")
        .output()
        .unwrap();
    assert!(!o.status.success());
}
