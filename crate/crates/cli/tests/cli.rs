use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nclp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nclp"))
        .args(args)
        .env_remove("NCLP_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &["--trials", "1", "--dims", "2,3", "--p-grid", "2,2.5,3,3.5"];

#[test]
fn verify_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for out in &outs {
        let mut args = vec!["verify", "--seed", "42", "--out", out.to_str().unwrap()];
        args.extend_from_slice(SMALL);
        let o = nclp(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("0 failures"));
    }
    assert_eq!(fs::read(&outs[0]).unwrap(), fs::read(&outs[1]).unwrap());
    let report = read_json(&outs[0]);
    assert_eq!(report["seed"], 42);
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_rejects_sub_two_exponents() {
    let o = nclp(&["verify", "--p-grid", "1.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p >= 2"));
}

#[test]
fn verify_with_zero_trials_is_empty() {
    let o = nclp(&["verify", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["cells"].as_array().unwrap().is_empty());
    assert_eq!(report["instances"], 0);
}

#[test]
fn injected_fault_exits_one_with_reproducer() {
    let mut args = vec!["verify", "--seed", "9", "--inject-fault"];
    args.extend_from_slice(SMALL);
    let o = nclp(&args);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failures = report["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["seed"], 9);
    assert_eq!(failures[0]["kind"], "injected");
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL theorem seed=9"));
}

#[test]
fn sweep_rows_and_determinism() {
    let args = ["sweep", "--dims", "2,3", "--p-grid", "2,3,4", "--trials", "5", "--seed", "3"];
    let a = nclp(&args);
    let b = nclp(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        if cols[2] == "2" {
            let gap: f64 = cols[6].parse().unwrap();
            assert!(gap.abs() <= 1e-11, "{row}");
        }
    }
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"seed": 5, "trials": 1, "dims": [2], "checks": ["theorem"]}"#).unwrap();
    let path = config.to_str().unwrap();
    let o = nclp(&["verify", "--config", path]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((r["seed"].as_u64(), r["config"]["dims"].clone()), (Some(5), serde_json::json!([2])));
    let o = nclp(&["verify", "--config", path, "--seed", "6", "--dims", "3"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((r["seed"].as_u64(), r["config"]["dims"].clone()), (Some(6), serde_json::json!([3])));

    fs::write(&config, r#"{"trials": 1, "dims": [2], "checks": ["theorem"]}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nclp"))
        .args(["verify", "--config", path])
        .env("NCLP_SEED", "77")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["seed"], 77);

    fs::write(&config, r#"{"trails": 1}"#).unwrap();
    assert_eq!(code(&nclp(&["verify", "--config", path])), 2);
    assert_eq!(code(&nclp(&["verify", "--config", "/nonexistent/c.json"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&nclp(&["verify", "--no-such-flag"])), 2);
    assert_eq!(code(&nclp(&["frobnicate"])), 2);
    assert_eq!(code(&nclp(&["verify", "--trials", "many"])), 2);
    assert_eq!(code(&nclp(&["verify", "--dims", "9"])), 2);
}

#[test]
fn counterexample_reports_witness() {
    let o = nclp(&["counterexample", "--p", "1"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["ratio"].as_f64().unwrap() >= 1.49);
    assert_eq!(r["exceeds_one"], true);
    assert!(r["weights"].as_array().unwrap().len() == 2 && r["x"].as_array().unwrap().len() == 2);
    assert_eq!(code(&nclp(&["counterexample", "--p", "2"])), 2);
}

#[test]
fn derivative_table() {
    let o = nclp(&["derivative", "--dim", "3", "--p", "3.5", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["methods"].as_array().unwrap().len(), 4);
    assert_eq!(r["pass"], true);
    let o = nclp(&["derivative", "--dim", "3", "--p", "3.5"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("euler residual"));
}

#[test]
fn semigroup_diagnostics() {
    let o = nclp(&["semigroup", "--dim", "3", "--p", "2.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let pinching = r#"{"kind":"pinching","expectation":{"kind":"blocks","sizes":[1,2]}}"#;
    let o = nclp(&["semigroup", "--dim", "3", "--generator", pinching, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
    assert_eq!(code(&nclp(&["semigroup", "--dim", "2", "--generator", pinching])), 2);
}

#[test]
fn check_echoes_operands() {
    let m = r#"{"dim":2,"re":[[2,1],[1,2]]}"#;
    let ops = format!(r#"{{"a":{m},"b":{m},"p":3}}"#);
    let o = nclp(&["check", "theorem_gap", &ops, "--tol", "1e-8"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["gap"], 0.0);
    assert_eq!(r["operands"]["p"], 3);
    assert_eq!(r["tolerances"][0]["source"], "--tol");

    let scalar = nclp(&["check", "classical_pointwise", r#"{"a":2,"b":1,"p":3}"#]);
    let r: Value = serde_json::from_slice(&scalar.stdout).unwrap();
    assert_eq!(r["result"]["gap"], 2.0);

    assert_eq!(code(&nclp(&["check", "theorem_gap", r#"{"a":1}"#])), 2);
    assert_eq!(code(&nclp(&["check", "theorem_gap", "not json"])), 2);
    assert_eq!(code(&nclp(&["check", "nope", "{}"])), 2);
    let indefinite = r#"{"a":{"dim":1,"re":[[-1]]},"b":{"dim":1,"re":[[1]]},"p":3}"#;
    assert_eq!(code(&nclp(&["check", "theorem_gap", indefinite])), 2);
}
