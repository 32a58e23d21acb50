//! Interface contracts of the `fracmc` binary: file formats, provenance
//! echo, replayability, exit codes, and thread-count independence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracmc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn solve_writes_table_with_closed_form_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rc.csv");
    let st = run(&[
        "solve", "--preset", "rc", "--beta", "0.5", "--t-max", "5", "--points", "50",
        "--m", "2000", "--seed", "42", "--output", out.to_str().unwrap(),
    ]);
    assert!(st.status.success(), "stderr: {}", String::from_utf8_lossy(&st.stderr));
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,mc_mean,mc_stderr,closed_form,abs_err");
    assert_eq!(lines.count(), 50);
    // every row carries the closed-form column
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), 5);
        assert!(!line.split(',').nth(3).unwrap().is_empty());
    }
    let echo = read(&dir.path().join("rc.csv.config.json"));
    assert!(echo.contains("\"command\": \"solve\""));
    assert!(echo.contains("\"preset\": \"rc\""));
}

#[test]
fn config_echo_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let st = run(&[
        "solve", "--preset", "lc-sin", "--beta", "0.7", "--t-max", "2", "--points", "8",
        "--m", "500", "--seed", "9", "--output", out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let first = read(&out);
    let echo = dir.path().join("run.csv.config.json");
    let st2 = run(&["--config", echo.to_str().unwrap()]);
    assert!(st2.status.success(), "stderr: {}", String::from_utf8_lossy(&st2.stderr));
    assert_eq!(first, read(&out), "replay changed the output");
}

#[test]
fn thread_count_never_changes_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (threads, path) in [("1", &a), ("4", &b)] {
        let st = run(&[
            "solve", "--preset", "nonhom-sin", "--beta", "0.6", "--t-max", "3",
            "--points", "12", "--m", "3000", "--seed", "1234",
            "--threads", threads, "--output", path.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(read(&a), read(&b), "thread count changed solve output");

    let wa = dir.path().join("wa.csv");
    let wb = dir.path().join("wb.csv");
    for (threads, path) in [("1", &wa), ("4", &wb)] {
        let st = run(&[
            "wave", "--beta", "0.5", "--c", "0.5", "--profile", "gauss10",
            "--nx", "31", "--nt", "5", "--t-max", "1", "--m", "2000",
            "--seed", "7", "--threads", threads, "--output", path.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(read(&wa), read(&wb), "thread count changed wave output");
}

#[test]
fn sample_emits_single_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let st = run(&[
        "sample", "--beta", "0.5", "--t", "1", "--m", "100", "--seed", "3",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s");
    assert_eq!(lines.clone().count(), 100);
    assert!(lines.all(|l| l.parse::<f64>().unwrap() > 0.0));
}

#[test]
fn ml_prints_known_value() {
    let st = run(&["ml", "--beta", "1", "--alpha", "1", "--z", "1"]);
    assert!(st.status.success());
    let v: f64 = String::from_utf8_lossy(&st.stdout).trim().parse().unwrap();
    assert!((v - std::f64::consts::E).abs() < 1e-12);
}

#[test]
fn transform_emits_identity_at_order_one() {
    let st = run(&["transform", "--pair", "cos", "--beta", "1", "--t-max", "3", "--points", "7"]);
    assert!(st.status.success());
    let text = String::from_utf8_lossy(&st.stdout).to_string();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,f,f_beta");
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - cols[2]).abs() < 1e-8, "{line}");
    }
}

#[test]
fn wave_writes_header_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let st = run(&[
        "wave", "--beta", "0.9", "--c", "0.5", "--profile", "gauss10",
        "--nx", "11", "--nt", "3", "--t-max", "1", "--m", "500", "--seed", "0",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let text = read(&out);
    assert!(text.starts_with("x,t,u,stderr\n"));
    assert_eq!(text.lines().count(), 1 + 11 * 3);
    let header: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("w.csv.header.json"))).unwrap();
    assert_eq!(header["beta"], 0.9);
    assert_eq!(header["f_name"], "gauss10");
    assert_eq!(header["m"], 500);
}

#[test]
fn unknown_preset_is_user_error_with_json() {
    let st = run(&["solve", "--preset", "nope", "--beta", "0.5"]);
    assert_eq!(st.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&st.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "user_error");
}

#[test]
fn invalid_order_is_user_error() {
    let st = run(&["solve", "--preset", "rc", "--beta", "1.5"]);
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    // far outside the positive-axis series radius at small order
    let st = run(&["ml", "--beta", "0.3", "--alpha", "1", "--z", "50"]);
    assert_eq!(st.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&st.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "numerical_failure");
}

#[test]
fn bad_flags_are_user_error_not_clap_two() {
    let st = run(&["solve", "--does-not-exist"]);
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn list_presets_contains_registry() {
    let st = run(&["list-presets"]);
    assert!(st.status.success());
    let text = String::from_utf8_lossy(&st.stdout).to_string();
    assert!(text.contains("rc"));
    assert!(text.contains("beam-uniform"));
    assert!(text.contains("l=1"));
    assert!(text.contains("ei=1"));
    let names = ["rc", "lc-cos", "lc-sin", "beam-uniform", "beam-axial",
                 "nonhom-exp", "nonhom-t2", "nonhom-sin"];
    for n in names {
        assert!(text.contains(n), "missing preset {n}");
    }
}

#[test]
fn ffnn_train_and_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let loss = dir.path().join("loss.csv");
    let st = run(&[
        "ffnn", "train", "--preset", "rc", "--beta", "1.0", "--trajectories", "8",
        "--grid-points", "24", "--t-max", "3", "--m", "50", "--window", "2",
        "--epochs", "300", "--seed", "5",
        "--model", model.to_str().unwrap(), "--loss-csv", loss.to_str().unwrap(),
    ]);
    assert!(st.status.success(), "stderr: {}", String::from_utf8_lossy(&st.stderr));
    assert!(String::from_utf8_lossy(&st.stdout).starts_with("test_mse,"));
    assert!(read(&loss).starts_with("epoch,train_mse,val_mse"));

    let st2 = run(&[
        "ffnn", "predict", "--model", model.to_str().unwrap(),
        "--window-values", "0.9,0.8", "--steps", "4",
    ]);
    assert!(st2.status.success(), "stderr: {}", String::from_utf8_lossy(&st2.stderr));
    let text = String::from_utf8_lossy(&st2.stdout).to_string();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("step,value\n"));
}

#[test]
fn env_var_supplies_default_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["sample", "--beta", "0.5", "--t", "1", "--m", "50"];
    let st = bin()
        .args(common)
        .args(["--output", a.to_str().unwrap()])
        .env("FRACMC_SEED", "777")
        .output()
        .unwrap();
    assert!(st.status.success());
    let st = bin()
        .args(common)
        .args(["--seed", "777", "--output", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(st.status.success());
    assert_eq!(read(&a), read(&b));
}
