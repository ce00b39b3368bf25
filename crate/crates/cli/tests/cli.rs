use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn guidance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guidance")).args(args).output().expect("binary runs")
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"));
    assert!(v["message"].is_string());
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn unknown_policy_is_a_config_error() {
    let out = guidance(&["evaluate", "--policy", "lstm", "--episodes", "1"]);
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn unknown_scenario_is_reported() {
    let out = guidance(&["evaluate", "--scenario", "venus", "--policy", "drdv"]);
    assert_eq!(error_kind(&out), "scenario");
}

#[test]
fn bad_flag_is_a_usage_error() {
    let out = guidance(&["train", "--seeed", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
}

#[test]
fn missing_checkpoint_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = guidance(&["evaluate", "--policy", "mlp", "--episodes", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(error_kind(&out), "io");
}

#[test]
fn drdv_evaluate_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = guidance(&["evaluate", "--scenario", "mars-deterministic", "--policy", "drdv", "--episodes", "3", "--seed", "4", "--out", out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["episodes"], 3);
    assert_eq!(v["success_rate"], 1.0);
    assert!(dir.path().join("mars-deterministic/drdv/eval.csv").is_file());

    let out = guidance(&["compare", "--scenario", "mars-deterministic", "--out", out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DR/DV"));
    assert!(dir.path().join("mars-deterministic/compare.csv").is_file());

    let out = guidance(&["compare", "--scenario", "mars-deterministic", "--policy", "drdv,mlp", "--out", out_dir]);
    assert_eq!(error_kind(&out), "missing-run");
}

#[test]
fn train_from_run_file_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.toml");
    std::fs::write(&run, "scenario = \"point-mass\"\npolicy = \"mlp\"\nupdates = 2\nepisodes_per_update = 4\nwarmup_episodes = 4\n").unwrap();
    let out_dir = dir.path().join("out");
    let args = |verb: &'static str| -> Vec<String> {
        vec![verb.into(), "--config".into(), run.display().to_string(), "--out".into(), out_dir.display().to_string(), "--episodes".into(), "5".into()]
    };
    let out = Command::new(env!("CARGO_BIN_EXE_guidance")).args(args("train")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["updates"], 2);
    let run_dir = out_dir.join("point-mass/mlp");
    assert!(run_dir.join("policy.ckpt").is_file());
    assert!(run_dir.join("learning_curve.csv").is_file());

    let out = Command::new(env!("CARGO_BIN_EXE_guidance")).args(args("evaluate")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&run_dir.join("eval.csv")), 5);
}

#[test]
fn unknown_run_file_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.toml");
    std::fs::write(&run, "learning_rate = 3\n").unwrap();
    let out = guidance(&["train", "--config", run.to_str().unwrap()]);
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn altimeter_characterization_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = guidance(&["characterize-altimeter", "--episodes", "20", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 5);
    assert_eq!(csv_rows(&dir.path().join("altimeter_error.csv")), 5);
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}
