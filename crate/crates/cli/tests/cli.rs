use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn xpaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xpaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = xpaudit(&all);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let mut args = vec!["generate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = xpaudit(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const AND2: &str = r#"{
  "kind": "tabular",
  "domains": [["0", "1"], ["0", "1"]],
  "outputs": {"0,0": "0", "0,1": "0", "1,0": "0", "1,1": "1"}
}"#;

const IDENTITY: &str = r#"{
  "kind": "tabular",
  "domains": [["0", "1"]],
  "outputs": {"0": "0", "1": "1"}
}"#;

fn exact_scores(report: &Value) -> Vec<String> {
    report["result"]["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["exact"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn shap_on_rho2_uses_the_sidecar() {
    let dir = TempDir::new().unwrap();
    let model = generate(&dir, "rho2", &["--family", "rho2"]);
    let report = json(&["shap", "--model", s(&model)]);
    assert_eq!(exact_scores(&report), ["0", "1/2"]);
    assert_eq!(report["result"]["nu_empty"]["exact"], "1/2");
    assert_eq!(report["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn shap_on_running_example_with_explicit_instance() {
    let dir = TempDir::new().unwrap();
    let model = generate(&dir, "r1", &["--family", "runex1", "--alpha", "1"]);
    let report = json(&[
        "shap",
        "--model",
        s(&model),
        "--instance",
        "1,1",
        "--delta",
        "0",
    ]);
    assert_eq!(exact_scores(&report), ["0", "1"]);
    assert_eq!(report["result"]["mode"], "classification");
}

#[test]
fn piecewise_models_need_a_threshold() {
    let dir = TempDir::new().unwrap();
    let model = generate(&dir, "rho2", &["--family", "rho2"]);
    fs::remove_file(dir.path().join("rho2.instance.json")).unwrap();
    let out = xpaudit(&["shap", "--model", s(&model), "--instance", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xpaudit(&[
        "shap",
        "--model",
        s(&model),
        "--instance",
        "1,1",
        "--delta",
        "1/5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn input_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let and = write(&dir, "and.json", AND2);
    let out = xpaudit(&["shap", "--model", s(&and), "--instance", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3 values"));
    let out = xpaudit(&["shap", "--model", s(&and), "--instance", "1,7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xpaudit(&[
        "shap",
        "--model",
        "/nonexistent/model.json",
        "--instance",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let broken = write(
        &dir,
        "broken.json",
        r#"{"kind": "tabular", "domains": [["0","1"]], "outputs": {"0": "1"}}"#,
    );
    let out = xpaudit(&["shap", "--model", s(&broken), "--instance", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = xpaudit(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explain_conjunction() {
    let dir = TempDir::new().unwrap();
    let and = write(&dir, "and.json", AND2);
    let out = xpaudit(&["explain", "--model", s(&and), "--instance", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("AXps: {{1,2}}"), "{text}");
    assert!(text.contains("CXps: {{1}, {2}}"), "{text}");
    assert!(text.contains("duality: ok"));
    let report = json(&["explain", "--model", s(&and), "--instance", "1,0"]);
    assert_eq!(report["result"]["axps"], serde_json::json!([[2]]));
    assert_eq!(report["result"]["duality"], true);
}

#[test]
fn audit_reports_issues() {
    let dir = TempDir::new().unwrap();
    let identity = write(&dir, "id.json", IDENTITY);
    let report = json(&["audit", "--model", s(&identity), "--instance", "1"]);
    assert_eq!(report["result"]["issues"], serde_json::json!([]));

    let prop4 = generate(&dir, "p4", &["--family", "prop4", "--m", "4"]);
    let report = json(&["audit", "--model", s(&prop4)]);
    let issues = report["result"]["issues"].as_array().unwrap();
    assert!(issues.contains(&Value::from("I5")), "{issues:?}");
    assert_eq!(report["result"]["scores"][4], "13/80");

    let r1 = generate(&dir, "r1", &["--family", "runex1"]);
    let text = stdout(&xpaudit(&["audit", "--model", s(&r1)]));
    assert!(text.contains("I2: yes"), "{text}");
    assert!(text.contains("I3: yes"), "{text}");
}

#[test]
fn generate_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("p1.json");
    let out = xpaudit(&[
        "generate",
        "--family",
        "prop1",
        "--m",
        "1",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
    let out = xpaudit(&["generate", "--family", "bogus", "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    let out = xpaudit(&[
        "generate",
        "--family",
        "runex1",
        "--alpha",
        "0",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lipschitz_verdicts() {
    let dir = TempDir::new().unwrap();
    let rho2 = generate(&dir, "rho2", &["--family", "rho2"]);
    let report = json(&["lipschitz", "--model", s(&rho2)]);
    assert_eq!(report["result"]["continuous"], false);
    assert!(!report["result"]["faces"].as_array().unwrap().is_empty());

    let rho3 = generate(&dir, "rho3", &["--family", "rho3", "--alpha", "1/2"]);
    let report = json(&["lipschitz", "--model", s(&rho3)]);
    assert_eq!(report["result"]["continuous"], true);
    assert_eq!(report["result"]["bound"]["exact"], "30");

    let constant = write(
        &dir,
        "const.json",
        r#"{"kind": "piecewise", "box": [["0", "1"]],
            "cells": [{"lo": ["0"], "hi": ["1"], "poly": [{"coef": "3", "vars": []}]}]}"#,
    );
    let report = json(&["lipschitz", "--model", s(&constant), "--norm", "l1"]);
    assert_eq!(report["result"]["bound"]["exact"], "0");

    let and = write(&dir, "and.json", AND2);
    assert_eq!(
        xpaudit(&["lipschitz", "--model", s(&and)]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_paper_passes_and_catches_a_broken_model() {
    let out = xpaudit(&["verify-paper"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));

    let dir = TempDir::new().unwrap();
    let rho2 = generate(&dir, "rho2", &["--family", "rho2"]);
    // change the x2 + 1 cell to x2 + 2
    let mut model: Value = serde_json::from_str(&fs::read_to_string(&rho2).unwrap()).unwrap();
    let terms = model["cells"][2]["poly"].as_array_mut().unwrap();
    for term in terms.iter_mut() {
        if term["vars"].as_array().unwrap().is_empty() {
            term["coef"] = Value::from("2");
        }
    }
    let broken = write(&dir, "broken.json", &model.to_string());
    let out = xpaudit(&["verify-paper", "--model", s(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("FAIL  rho2: nu(S)"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn generated_files_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    for (name, args) in [
        ("rho3", vec!["--family", "rho3", "--alpha", "-1/4"]),
        ("p3", vec!["--family", "prop3", "--m", "2"]),
    ] {
        let first = generate(&dir, name, &args);
        let again = generate(&dir, &format!("{name}-again"), &args);
        assert_eq!(fs::read(&first).unwrap(), fs::read(&again).unwrap());
        // reparse and rewrite through the library format
        let text = fs::read_to_string(&first).unwrap();
        let model = xpaudit::models::json::parse_model(&text).unwrap();
        assert_eq!(xpaudit::models::json::write_model(&model), text);
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p5 = generate(&dir, "p5", &["--family", "prop5", "--m", "3"]);
    let args = ["--json", "audit", "--model", s(&p5)];
    let a = xpaudit(&args);
    let b = xpaudit(&args);
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    let digest = report["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}
