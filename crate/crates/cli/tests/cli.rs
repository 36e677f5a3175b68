//! End-to-end behavior of the `formlab` binary.

use std::fs;
use std::process::{Command, Output};

fn formlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formlab"))
        .args(args)
        .env("FORMLAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn list_names_every_bundled_scenario() {
    let out = formlab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "example-indefinite",
        "mu-family",
        "offdiag-demo",
        "identity-control",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn reproduce_example_passes() {
    let out = formlab(&["reproduce", "example-indefinite"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["stability"]["consensus"], "unstable");
    assert!(report["violations"].as_array().unwrap().is_empty());
    assert!(report["krein"]["singular"].as_bool().unwrap());
}

#[test]
fn diagnose_balanced_mu_family_is_stable() {
    let out = formlab(&["diagnose", "--scenario", "mu-family", "--param", "mu=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["stability"]["consensus"], "stable");
    assert!(report["records"][0]["identities"].is_null());
}

#[test]
fn scenario_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.json");
    fs::write(
        &path,
        r#"{"name": "pair", "block_size": 2, "A": [["1", "0"], ["0", "k"]],
            "H": [["1", "0"], ["0", "-1"]], "dims": [4, 8, 16], "seed": 3}"#,
    )
    .unwrap();
    let out = formlab(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert_eq!(report["scenario"], "pair");
    assert_eq!(report["records"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_scenario_is_a_usage_error() {
    let out = formlab(&["run", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_inputs_are_usage_errors() {
    assert_eq!(
        formlab(&["reproduce", "no-such-scenario"]).status.code(),
        Some(2)
    );
    assert_eq!(
        formlab(&["reproduce", "mu-family", "--param", "mu"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        formlab(&["reproduce", "mu-family", "--param", "mu=k"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        formlab(&["run", "--scenario", "mu-family", "--dims", "0,4"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"name": "bad", "block_size": 2}"#).unwrap();
    assert_eq!(
        formlab(&["run", "--scenario", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_expectation_exits_one() {
    // two sizes are too few to classify growth, so the expected verdict is missed
    let out = formlab(&["reproduce", "example-indefinite", "--dims", "2,4"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["stability"]["consensus"], "inconclusive");
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for path in [&first, &second] {
        let out = formlab(&["reproduce", "dirac-free", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let threaded = Command::new(env!("CARGO_BIN_EXE_formlab"))
        .args(["reproduce", "dirac-free"])
        .env("FORMLAB_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(threaded.stdout, fs::read(&first).unwrap());
}

#[test]
fn csv_series_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let out = formlab(&[
        "diagnose",
        "--scenario",
        "identity-control",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,n,dim,value"));
    let norm_x: Vec<&str> = lines.filter(|l| l.starts_with("norm_x,")).collect();
    assert_eq!(norm_x.len(), 4);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_formlab"))
        .args(["list"])
        .env("FORMLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
