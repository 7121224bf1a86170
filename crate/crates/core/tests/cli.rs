use std::fs;
use std::process::Command;

use serde_json::Value;

use onofri_lab::cli::{run, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_onofri-lab"))
        .args(args)
        .env_remove("ONOFRI_LAB_JOBS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).unwrap_or_else(|e| panic!("not JSON ({e}): {s}"))
}

#[test]
fn theta0_prints_json() {
    let (code, out, _) = bin(&["constants", "theta0", "--d", "2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["theta0"], 1);
    let (code, out, _) = bin(&["constants", "theta0", "--d", "3/2"]);
    assert_eq!(code, 0);
    // 16·¼ / (4.5·3.5)
    let v = json(&out)["theta0"].as_f64().unwrap();
    assert!((v - 4.0 / 15.75).abs() < 1e-15);
}

#[test]
fn out_of_domain_is_usage_error() {
    let (code, _, err) = bin(&["constants", "theta0", "--d", "6"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
    assert_eq!(bin(&["no-such-command"]).0, EXIT_USAGE);
    assert_eq!(bin(&["weights", "lambda-star", "--weight", "keller-segel:9999"]).0, EXIT_USAGE);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = bin(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("lambda-star"));
}

#[test]
fn abc_and_discriminant() {
    let (_, out, _) = bin(&["constants", "abc", "--d", "2", "--theta", "1"]);
    let v = json(&out);
    assert_eq!(v["a"].as_f64(), Some(0.5));
    assert_eq!(v["b"].as_f64(), Some(-0.5));
    assert_eq!(v["c"].as_f64(), Some(0.125));
    let (_, out, _) = bin(&["constants", "discriminant", "--d", "3", "--theta", "1"]);
    assert_eq!(json(&out)["sign"], 1);
}

#[test]
fn spectrum_of_unit_volume_sphere() {
    let (code, out, _) = bin(&[
        "spectrum", "lambda1", "--geometry", "sphere", "--normalization", "unit-volume", "--resolution", "64",
    ]);
    assert_eq!(code, 0);
    let v = json(&out)["lambda1"].as_f64().unwrap();
    assert!((v - 8.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn rigidity_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rig.csv");
    let code = run([
        "onofri-lab", "rigidity", "circle", "--lambda", "1,5", "--inits", "3", "--resolution", "64", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,init,branch_tag,residual,distance_to_constant,deficit"
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.contains(",constant,")));
}

#[test]
fn flow_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flow.csv");
    let (code, out, _) = bin(&[
        "flow", "sphere", "--lambda", "1", "--t-final", "0.1", "--resolution", "16", "--record-every", "10",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let summary = json(&out);
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-10);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,F,G,mass,sup_f\n"));
    assert!(text.lines().count() > 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let report = dir.path().join("report.csv");
    let summary = dir.path().join("summary.json");
    fs::write(
        &cfg,
        format!(
            "[identities run]\ntrials = 2\nresolution = 64\nsummary = {}\n",
            summary.display()
        ),
    )
    .unwrap();
    let code = run([
        "onofri-lab", "--config", cfg.to_str().unwrap(), "identities", "run", "--suite", "circle", "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let s = json(&fs::read_to_string(&summary).unwrap());
    assert_eq!(s["failed"], 0);
    // 2 trials per identity
    let rows = fs::read_to_string(&report).unwrap().lines().count() - 1;
    assert_eq!(rows, 2 * s["per_identity"].as_array().map_or(rows / 2, |a| a.len()));
}

#[test]
fn identity_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.csv");
    // an absurd tolerance makes the nonexact checks fail
    let code = run([
        "onofri-lab", "identities", "run", "--suite", "sphere", "--trials", "2", "--resolution", "8", "--tol",
        "1e-300", "--output", report.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED);
}

#[test]
fn jobs_env_overrides_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_onofri-lab"))
        .args(["--jobs", "0", "constants", "theta0", "--d", "2"])
        .env("ONOFRI_LAB_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_onofri-lab"))
        .args(["constants", "theta0", "--d", "2"])
        .env("ONOFRI_LAB_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn weights_commands() {
    let (code, out, _) = bin(&["weights", "lambda-star", "--weight", "gaussian:1"]);
    assert_eq!(code, 0);
    assert!((json(&out)["lambda_star"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    let (code, out, _) = bin(&["weights", "perturbation", "--amplitude", "0.05"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["bound"].as_f64().unwrap() <= v["lambda_star"].as_f64().unwrap());
}
