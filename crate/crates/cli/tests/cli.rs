//! The `dblpqa` binary against the recorded fixtures of the core crate.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn dblpqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dblpqa"))
        .arg("--config")
        .arg(fixtures().join("replay.toml"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const WALKTHROUGH: &str = "please enumerate the authors of 'BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding' along with the venues where they have published other papers.";

#[test]
fn ask_prints_every_stage() {
    let out = stdout(&dblpqa(&["ask", WALKTHROUGH]));
    for section in ["[1] logical form", "[2] entities", "[3] templates", "[4] query", "[5] answers"] {
        assert!(out.contains(section), "{out}");
    }
    assert!(out.contains("[x] 0: BERT"), "{out}");
    assert!(out.contains("https://dblp.org/pid/69/4618"), "{out}");
    assert!(!out.contains(" ! "), "{out}");
}

#[test]
fn ask_json_is_the_session_state() {
    let out = stdout(&dblpqa(&["ask", "--json", WALKTHROUGH]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["revision"], 1);
    assert!(v["answers"]["rows"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn build_templates_reproduces_the_fixture_base() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("templates.json");
    let out = stdout(&dblpqa(&[
        "build-templates",
        "--dataset",
        fixtures().join("datasets/train.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert!(out.starts_with("2000 items, 114 templates, 40 skipped"), "{out}");
    let built: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let fixture: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("templates.json")).unwrap()).unwrap();
    assert_eq!(built["templates"], fixture["templates"]);
}

#[test]
fn eval_writes_a_report_and_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = stdout(&dblpqa(&[
        "eval",
        "--dataset",
        fixtures().join("datasets/eval50.json").to_str().unwrap(),
        "--mode",
        "gold-lf",
        "--report",
        report.to_str().unwrap(),
    ]));
    assert!(out.contains("mode      gold-lf"), "{out}");
    assert!(out.contains("items     50"), "{out}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["items"].as_array().unwrap().len(), 50);
    assert_eq!(json["mode"], "gold-logical-form");
}

#[test]
fn bad_arguments_fail_cleanly() {
    let o = dblpqa(&["eval", "--dataset", "x.json", "--mode", "nope"]);
    assert!(!o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_dblpqa"))
        .args(["--config", "/nonexistent.toml", "ask", "q"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn shipped_config_parses() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/dblpqa.toml");
    let cfg = dblpqa::config::AppConfig::load(&path).unwrap();
    assert_eq!(cfg.templates.k, 5);
    assert!(cfg.templates.path.unwrap().ends_with("config/templates.json"));
}
