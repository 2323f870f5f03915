use mub_core::io::{load_document, load_family};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn mub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mub")).args(args).output().expect("spawn mub")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("f.json");
    let report = dir.path().join("r.json");
    let o = mub(&["construct", "--d", "5", "--out", path_str(&family)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(load_family(&family).unwrap().num_bases(), 6);

    let o = mub(&["verify", path_str(&family), "--report", path_str(&report), "--full-gram"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["report"]["passed"], Value::Bool(true));
    assert_eq!(doc["input_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(doc["report"]["gram"].as_array().unwrap().len(), 30);
}

#[test]
fn construct_to_stdout() {
    let o = mub(&["construct", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["dimension"], 3);
    assert_eq!(doc["bases"].as_array().unwrap().len(), 4);
}

#[test]
fn composite_dimension_rejected() {
    let o = mub(&["construct", "--d", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Proposition 3 requires prime d"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn gauss_subcommand() {
    let o = mub(&["gauss", "--u", "2", "--v", "0", "--w", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("|S|^2 = 3.000000000000"));
    let o = mub(&["gauss", "--u", "0", "--v", "0", "--w", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reconstruct_adds_states() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("f.json");
    let states = dir.path().join("s.json");
    assert_eq!(mub(&["construct", "--d", "3", "--out", path_str(&family)]).status.code(), Some(0));
    let o = mub(&["reconstruct", path_str(&family), "--out", path_str(&states)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = load_document(&states).unwrap();
    let vectors = doc.to_states().unwrap().unwrap();
    assert_eq!(vectors.len(), 4);
    let report = mub_core::verify::verify_states(&vectors, 1e-9).unwrap();
    assert!(report.passed, "{}", report.summary());
}

#[test]
fn reconstruct_rejects_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("f.json");
    assert_eq!(mub(&["construct", "--d", "2", "--out", path_str(&family)]).status.code(), Some(0));
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&family).unwrap()).unwrap();
    // Replace one projector by I/2: trace 1, PSD, but not rank one.
    doc["bases"][1]["projectors"][0]["matrix"] =
        serde_json::json!([[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]);
    std::fs::write(&family, doc.to_string()).unwrap();
    let o = mub(&["reconstruct", path_str(&family)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("a=1, alpha=0"), "{}", stderr(&o));
}

#[test]
fn search_writes_family_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("found.json");
    let log = dir.path().join("log.json");
    let o = mub(&[
        "search", "--d", "2", "--bases", "3", "--seed", "42", "--out", path_str(&out), "--log",
        path_str(&log),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = load_document(&out).unwrap();
    assert_eq!(doc.metadata["status"], "converged");
    let log: Value = serde_json::from_str(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(log["converged"], Value::Bool(true));
    assert_eq!(log["config"]["seed"], 42);
    assert!(log["best_objective"].as_f64().unwrap() < 1e-16);

    let o = mub(&["verify", path_str(&out), "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn search_from_existing_family() {
    let dir = tempfile::tempdir().unwrap();
    let family = dir.path().join("f.json");
    assert_eq!(mub(&["construct", "--d", "3", "--out", path_str(&family)]).status.code(), Some(0));
    let o = mub(&["search", "--d", "3", "--bases", "4", "--from", path_str(&family)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = mub(&["search", "--d", "3", "--bases", "3", "--from", path_str(&family)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_without_convergence_exits_one() {
    let o = mub(&["search", "--d", "6", "--bases", "7", "--restarts", "1", "--iters", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("residual floor reached"), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["metadata"]["status"], "residual floor reached");
}

#[test]
fn bad_input_is_usage_error() {
    assert_eq!(mub(&["verify", "/nonexistent/family.json"]).status.code(), Some(2));
    assert_eq!(mub(&["construct", "--d", "5", "--colour", "blue"]).status.code(), Some(2));
    assert_eq!(mub(&["search", "--d", "2", "--bases", "9"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"format_version\": \"1.0\", \"dimension\": 2").unwrap();
    let o = mub(&["verify", path_str(&junk)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
}
