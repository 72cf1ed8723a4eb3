use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haps-isac"))
        .args(args)
        .current_dir(cwd)
        .env("ISAC_SIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn solve_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--seed", "3", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/single.csv")).unwrap();
    assert!(csv.starts_with("uav,x,y,comm_power,sense_power,eta,omega,min_rate,fitness,feasible\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/single.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "single");
    assert_eq!(json["config_echo"]["ga"]["seed"], 3);
}

#[test]
fn rerun_from_envelope_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sweep-gamma", "--out", "a"], dir.path()).status.code(), Some(0));
    let out = run(&["sweep-gamma", "--config", "a/gamma-sweep.json", "--out", "b"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a/gamma-sweep.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/gamma-sweep.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generate_writes_explicit_placements() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["generate"], dir.path()).status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/scenario.json")).unwrap()).unwrap();
    assert!(v["scenario"]["cu_positions"].is_array());
    assert!(v["scenario"]["target_positions"].is_array());
}

#[test]
fn usage_and_config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["solve", "--config", "missing.json"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{ \"ga\": { \"population\": 1 } }").unwrap();
    let out = run(&["solve", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("population"));
}

#[test]
fn infeasible_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{ "scenario": { "gamma_th": 1.0e3, "p_max_dbm": 0.0 } }"#;
    std::fs::write(dir.path().join("hard.json"), cfg).unwrap();
    let out = run(&["solve", "--config", "hard.json"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/validate.csv")).unwrap();
    assert!(!csv.contains(",false"));
}
