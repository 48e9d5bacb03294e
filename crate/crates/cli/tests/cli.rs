use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const C4: &str = r#"{"vertices":[{"id":0},{"id":1},{"id":2},{"id":3}],
"edges":[{"u":0,"v":1,"label":"U"},{"u":1,"v":2,"label":"U"},{"u":2,"v":3,"label":"U"},{"u":3,"v":0,"label":"U"}]}"#;

const TRUE_QBF: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n";
const FALSE_QBF: &str = "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n1 -2 0\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pursuit"))
        .args(args)
        .env_remove("PURSUIT_BUDGET")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn c4_one_cop_loses_two_cops_win() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "c4.json", C4);
    let one = run(&["solve", "--graph", s(&g), "--cops", "1"]);
    assert_eq!(one.status.code(), Some(10));
    assert_eq!(json(&one)["winner"], "robber");
    let two = run(&["solve", "--graph", s(&g), "--cops", "2"]);
    assert_eq!(two.status.code(), Some(0));
    let v = json(&two);
    assert_eq!(v["winner"], "cops");
    assert_eq!(v["placement"].as_array().unwrap().len(), 2);
}

#[test]
fn budget_overflow_exits_twenty() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "c4.json", C4);
    let out = run(&["solve", "--graph", s(&g), "--cops", "2", "--budget", "1"]);
    assert_eq!(out.status.code(), Some(20));
    let env = Command::new(env!("CARGO_BIN_EXE_pursuit"))
        .args(["solve", "--graph", s(&g), "--cops", "2"])
        .env("PURSUIT_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(20));
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bad.json", "{bad");
    assert_eq!(run(&["solve", "--graph", s(&g), "--cops", "1"]).status.code(), Some(2));
    let g = write(&dir, "c4.json", C4);
    assert_eq!(run(&["solve", "--graph", s(&g)]).status.code(), Some(2));
}

#[test]
fn eval_qbf_prints_truth() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.qdimacs", TRUE_QBF);
    let f = write(&dir, "f.qdimacs", FALSE_QBF);
    assert_eq!(String::from_utf8(run(&["eval-qbf", "--in", s(&t)]).stdout).unwrap().trim(), "true");
    assert_eq!(String::from_utf8(run(&["eval-qbf", "--in", s(&f)]).stdout).unwrap().trim(), "false");
}

#[test]
fn reduce_qbf_then_solve_matches_truth() {
    let dir = TempDir::new().unwrap();
    for (text, code) in [(TRUE_QBF, 0), (FALSE_QBF, 10)] {
        let q = write(&dir, "q.qdimacs", text);
        let inst = dir.path().join("inst.json");
        let red = run(&["reduce", "qbf2crps", "--in", s(&q), "--out", s(&inst)]);
        assert!(red.status.success(), "{}", String::from_utf8_lossy(&red.stderr));
        let solved = run(&["solve", "--in", s(&inst)]);
        assert_eq!(solved.status.code(), Some(code));
    }
}

#[test]
fn reduce_writes_dot_with_dashed_protected_edges() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.qdimacs", TRUE_QBF);
    let inst = dir.path().join("inst.json");
    let dot = dir.path().join("inst.dot");
    let red = run(&["reduce", "qbf2crps", "--in", s(&q), "--out", s(&inst), "--dot", s(&dot)]);
    assert!(red.status.success());
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph G {"));
    assert!(text.contains("style=dashed"));
}

#[test]
fn export_dot_keeps_unprotected_edges_solid() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "c4.json", C4);
    let out = run(&["export", "--dot", "--in", s(&g)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches(" -- ").count(), 4);
    assert!(!text.contains("dashed"));
}

#[test]
fn play_scripted_cops_capture_on_true_formula() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.qdimacs", TRUE_QBF);
    let inst = dir.path().join("inst.json");
    assert!(run(&["reduce", "qbf2crps", "--in", s(&q), "--out", s(&inst)]).status.success());
    let out = run(&["play", "--in", s(&inst), "--cops", "gphi-script", "--robber", "random", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["captured"], true);
    assert_eq!(v["counters"]["cops"]["fallbacks"], 0);
}

#[test]
fn cr_to_crp_round_trip_keeps_winner() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "c4.json", C4);
    let inst = dir.path().join("inst.json");
    assert!(run(&["reduce", "cr2crp", "--in", s(&g), "--cops", "1", "--out", s(&inst)]).status.success());
    assert_eq!(run(&["solve", "--in", s(&inst)]).status.code(), Some(10));
}

#[test]
fn verify_runs_a_suite() {
    let out = run(&["verify", "oracles"]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
}
