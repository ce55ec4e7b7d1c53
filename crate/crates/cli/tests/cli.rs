use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fucik(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fucik"))
        .args(args)
        .env_remove("FUCIK_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_suite_passes_and_exits_zero() {
    let out = fucik(&["check", "--p", "2", "--nodes", "50", "--seed", "7"]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{table}");
    assert!(table.lines().count() >= 9);
    assert!(table.lines().all(|l| l.ends_with("PASS")), "{table}");
}

#[test]
fn eig_reports_first_eigenvalue_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.json");
    let csv = dir.path().join("phi.csv");
    let status = fucik(&[
        "eig",
        "--p",
        "2",
        "--nodes",
        "200",
        "--out",
        path_str(&out),
        "--csv",
        path_str(&csv),
    ]);
    assert!(status.status.success());
    let v = json(&out);
    let l1 = v["result"]["lambda1"].as_f64().unwrap();
    let l2 = v["result"]["lambda2"].as_f64().unwrap();
    assert!((l1 - 9.87).abs() < 0.01, "{l1}");
    assert!((l2 - 39.48).abs() < 0.05, "{l2}");
    assert_eq!(v["provenance"]["domain"]["n_interior"], 200);
    assert_eq!(v["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 202);
}

#[test]
fn curve_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let csv = dir.path().join("curve.csv");
    let out = fucik(&[
        "curve",
        "--p",
        "2",
        "--nodes",
        "80",
        "--s-grid",
        "0,10,20,40",
        "--out",
        path_str(&spec),
        "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 8);

    let label = |a: &str, b: &str| {
        let out = fucik(&["classify", "--a", a, "--b", b, "--spectrum", path_str(&spec)]);
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["label"].as_str().unwrap().to_string()
    };
    assert_eq!(label("20", "20"), "between_Cu1_C2");
    assert_eq!(label("5", "5"), "below_Cl1");
    assert_eq!(label("20", "5"), "between_Cl1_Cu1");
    assert_eq!(label("45", "45"), "above_C2");
}

#[test]
fn identical_runs_give_identical_bytes_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = fucik(&[
            "solve",
            "--nodes",
            "60",
            "--a0",
            "45",
            "--b0",
            "45",
            "--a",
            "5",
            "--b",
            "5",
            "--seed",
            "3",
            "--workers",
            workers,
            "--out",
            path_str(&out),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).unwrap()
    };
    let first = run("a.json", "1");
    let second = run("b.json", "1");
    let third = run("c.json", "3");
    assert_eq!(first, second);
    assert_eq!(first, third);
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert!(v["result"]["solutions"].as_array().unwrap().len() >= 3);
    assert!(v["result"]["missing"].as_array().unwrap().is_empty());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"p": 3.0, "nodes": 40, "s": 5.0}"#).unwrap();
    let out = dir.path().join("mpass.json");
    let status = fucik(&["mpass", "--config", path_str(&cfg), "--p", "2", "--out", path_str(&out)]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v = json(&out);
    assert_eq!(v["provenance"]["p"]["p"], 2.0);
    assert_eq!(v["provenance"]["domain"]["n_interior"], 40);
    assert_eq!(v["result"]["s"], 5.0);
    assert!(v["result"]["c"].as_f64().unwrap() > v["result"]["lambda1"].as_f64().unwrap());
}

#[test]
fn invalid_configuration_is_a_usage_error() {
    for args in [
        vec!["eig", "--p", "0.5"],
        vec!["classify", "--a", "20", "--b", "20"],
        vec!["solve", "--a0", "45", "--b0", "45", "--a", "5"],
        vec!["mpass", "--beads", "3"],
        vec!["eig", "--workers", "0"],
    ] {
        let out = fucik(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let first = String::from_utf8(out.stderr).unwrap();
        let v: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
        assert_eq!(v["error"]["kind"], "usage", "{args:?}");
    }
}

#[test]
fn module_failure_is_structured() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("spec.json");
    std::fs::write(&bogus, r#"{"format_version": 99}"#).unwrap();
    let out = fucik(&["classify", "--a", "20", "--b", "20", "--spectrum", path_str(&bogus)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "Serialization");
}

#[test]
fn solve_writes_one_csv_per_solution() {
    let dir = tempfile::tempdir().unwrap();
    let fields = dir.path().join("fields");
    let out = fucik(&[
        "solve",
        "--nodes",
        "60",
        "--a0",
        "5",
        "--b0",
        "5",
        "--a",
        "20",
        "--b",
        "20",
        "--csv-dir",
        path_str(&fields),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let n = v["result"]["solutions"].as_array().unwrap().len();
    assert!(n >= 2);
    for k in 0..n {
        assert!(fields.join(format!("solution_{k}.csv")).exists());
    }
}

#[test]
fn worker_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fucik"))
        .args(["eig", "--nodes", "30"])
        .env("FUCIK_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_fucik"))
        .args(["eig", "--nodes", "30"])
        .env("FUCIK_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
