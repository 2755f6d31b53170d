use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dendrolab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// W_3 at depth 2, written to `w.json`.
fn build(dir: &TempDir) -> PathBuf {
    let out = path(dir, "w.json");
    let o = run(&["build", "--orders", "3", "--ratio", "1/4", "--depth", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn build_writes_a_dendrite() {
    let o = run(&["build", "--orders", "3,omega", "--ratio", "1/8", "--depth", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["nodes"].as_array().unwrap().len() > 2);
    assert!(v["edges"].as_array().unwrap().iter().all(|e| e[2].as_str().unwrap().contains('/')));
}

#[test]
fn generated_chains_pass_the_check() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let chain = path(&dir, "c.json");
    let o = run(&["chain", "gen", "--space", s(&w), "--seed", "3", "--out", s(&chain)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["chain", "check", "--chain", s(&chain)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["willful_all_arcs"], Value::Bool(true));
}

#[test]
fn chains_are_homeomorphic_to_themselves() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let chain = path(&dir, "c.json");
    assert!(run(&["chain", "gen", "--space", s(&w), "--out", s(&chain)]).status.success());
    let o = run(&["homeo", "--c1", s(&chain), "--c2", s(&chain), "--steps", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["iso"].is_object() || v["iso"].is_array());
}

#[test]
fn unknown_flags_are_usage_errors() {
    let o = run(&["build", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn malformed_json_names_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{\n  \"nodes\": [\n    {\"id\": 0,\n").unwrap();
    let o = run(&["export-dot", "--space", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.json") && err.contains("line"), "{err}");
}

#[test]
fn failed_preconditions_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let spine = path(&dir, "spine.json");
    std::fs::write(&spine, r#"{"extremes": [0, 1]}"#).unwrap();
    let o = run(&["homeo", "--space", s(&w), "--k1", s(&spine), "--k2", s(&spine)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn coarse_resolution_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let o = run(&["chain", "gen", "--space", s(&w), "--delta", "1/64"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("REFINE_NEEDED"), "{}", stderr(&o));
}

#[test]
fn nerve_ends_with_a_verdict() {
    let dir = TempDir::new().unwrap();
    let square = path(&dir, "square.json");
    std::fs::write(&square, r#"{"nodes": 4, "edges": [[0,1,"1"],[1,2,"1"],[2,3,"1"],[3,0,"1"]]}"#).unwrap();
    let o = run(&["nerve", "--space", s(&square), "--eps", "1/2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("graph"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("// verdict: not tree-like"), "{last}");

    let w = build(&dir);
    let o = run(&["nerve", "--space", s(&w), "--eps", "1/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().last().unwrap().starts_with("// verdict:"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let again = run(&["build", "--orders", "3", "--ratio", "1/4", "--depth", "2"]);
    assert_eq!(std::fs::read_to_string(&w).unwrap(), stdout(&again));
    let a = run(&["chain", "gen", "--space", s(&w), "--seed", "9"]);
    let b = run(&["chain", "gen", "--space", s(&w), "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn export_dot_highlights_a_subdendrite() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let space: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let e = &space["edges"][0];
    let k = path(&dir, "k.json");
    std::fs::write(&k, format!(r#"{{"extremes": [{}, {{"edge": [{}, {}], "t": "1/2"}}]}}"#, e[0], e[0], e[1])).unwrap();
    let o = run(&["export-dot", "--space", s(&w)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("graph dendrite {"));
    let o = run(&["export-dot", "--space", s(&w), "--k", s(&k)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("lightblue"));
}

#[test]
fn classify_reports_fullness() {
    let dir = TempDir::new().unwrap();
    let w = build(&dir);
    let spine = path(&dir, "spine.json");
    std::fs::write(&spine, r#"{"extremes": [0, 1]}"#).unwrap();
    let o = run(&["classify", "--space", s(&w), "--k", s(&spine), "--eps", "1/8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["full"], Value::Bool(false));
    assert!(!v["maximality_failures"].as_array().unwrap().is_empty());
}
