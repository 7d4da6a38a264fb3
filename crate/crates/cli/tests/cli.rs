use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dispersion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispersion")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn run_to(dir: &Path, graph: &str, k: &str, seed: &str) -> (Output, String) {
    let trace = dir.join("trace.jsonl").to_string_lossy().into_owned();
    let out = dispersion(&["run", "--graph", graph, "--k", k, "--seed", seed, "--trace", &trace]);
    (out, trace)
}

#[test]
fn run_two_node_path() {
    let dir = tempfile::tempdir().unwrap();
    let (out, trace) = run_to(dir.path(), "gen:path:2", "2", "7");
    assert_eq!(code(&out), 0);
    let s = json(&out);
    let (t1, t2) = (s["t1"].as_u64().unwrap(), s["t2"].as_u64().unwrap());
    assert_eq!(s["rounds"].as_u64().unwrap(), t2 + t1 + 2);
    assert_eq!(s["repair_fired"], Value::Bool(true));
    let lines = fs::read_to_string(trace).unwrap().lines().count() as u64;
    assert_eq!(lines, s["rounds"].as_u64().unwrap() + 1);
}

#[test]
fn run_worstcase() {
    let out = dispersion(&["run", "--graph", "gen:worstcase:16", "--k", "16", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["outcome"], "dispersed_all_terminated");
}

#[test]
fn bad_arguments_exit_3() {
    assert_eq!(code(&dispersion(&["run", "--graph", "gen:path:3", "--k", "0"])), 3);
    assert_eq!(code(&dispersion(&["run", "--graph", "gen:path:3", "--k", "4"])), 3);
    assert_eq!(code(&dispersion(&["run", "--graph", "gen:tree:3", "--k", "2"])), 3);
    assert_eq!(code(&dispersion(&["run", "--graph", "/no/such/file", "--k", "2"])), 3);
    assert_eq!(code(&dispersion(&["run", "--k", "2"])), 3);
    assert_eq!(code(&dispersion(&["frobnicate"])), 3);
}

#[test]
fn round_budget_exits_2() {
    let out = dispersion(&["run", "--graph", "gen:complete:6", "--k", "6", "--max-rounds", "3"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["outcome"], "max_rounds_exceeded");
}

#[test]
fn verify_passing_run_twice() {
    let dir = tempfile::tempdir().unwrap();
    let (out, trace) = run_to(dir.path(), "gen:random:20:35:4", "12", "3");
    assert_eq!(code(&out), 0);
    let first = dispersion(&["verify", "--trace", &trace, "--graph", "gen:random:20:35:4"]);
    assert_eq!(code(&first), 0);
    let report = json(&first);
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 7);
    assert!(verdicts.iter().all(|v| v["pass"] == Value::Bool(true)));
    let second = dispersion(&["verify", "--trace", &trace, "--graph", "gen:random:20:35:4"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn verify_corrupted_trace_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let (_, trace) = run_to(dir.path(), "gen:ring:6", "5", "2");
    let text = fs::read_to_string(&trace).unwrap();
    let corrupted = text.replacen("\"bits\":21", "\"bits\":1000", 1);
    assert_ne!(text, corrupted);
    fs::write(&trace, corrupted).unwrap();
    let out = dispersion(&["verify", "--trace", &trace, "--graph", "gen:ring:6", "--checker", "memory"]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["verdicts"][0]["checker"], "memory");
    assert!(report["verdicts"][0]["findings"][0].as_str().unwrap().contains("1000 bits"));
}

#[test]
fn verify_mirror_single_robot_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let (_, trace) = run_to(dir.path(), "gen:ring:4", "1", "0");
    let out = dispersion(&["verify", "--trace", &trace, "--graph", "gen:ring:4", "--checker", "mirror"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdicts"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_rejects_unreadable_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "not json\n").unwrap();
    let bad = bad.to_string_lossy().into_owned();
    assert_eq!(code(&dispersion(&["verify", "--trace", &bad, "--graph", "gen:path:3"])), 3);
    let (_, trace) = run_to(dir.path(), "gen:complete:5", "4", "0");
    assert_eq!(code(&dispersion(&["verify", "--trace", &trace, "--graph", "gen:path:3"])), 3);
    assert_eq!(code(&dispersion(&["verify", "--trace", &trace, "--graph", "gen:complete:5", "--checker", "nope"])), 3);
}

#[test]
fn bench_reports_ratios() {
    let out = dispersion(&["bench", "--family", "worstcase", "--k-list", "16,32", "--trials", "2", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["k"], 16);
    assert!(rows[0]["ratio"].is_null());
    let ratio = rows[1]["ratio"].as_f64().unwrap();
    let means: Vec<f64> = rows.iter().map(|r| r["mean_rounds"].as_f64().unwrap()).collect();
    assert!((ratio - means[1] / means[0]).abs() < 1e-12);
}

#[test]
fn bench_large_pair_is_near_four() {
    let out = dispersion(&["bench", "--family", "worstcase", "--k-list", "64,128", "--trials", "2"]);
    assert_eq!(code(&out), 0);
    let ratio = json(&out)["rows"][1]["ratio"].as_f64().unwrap();
    assert!((3.4..=4.6).contains(&ratio), "{ratio}");
}

#[test]
fn bench_rejects_small_k() {
    assert_eq!(code(&dispersion(&["bench", "--family", "worstcase", "--k-list", "4"])), 3);
    assert_eq!(code(&dispersion(&["bench", "--family", "grid", "--k-list", "16"])), 3);
}

#[test]
fn gen_writes_canonical_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.graph");
    let p = path.to_string_lossy().into_owned();
    assert_eq!(code(&dispersion(&["gen", "--spec", "gen:path:2", "--out", &p])), 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), "2 1\n0 0 1 0\n");

    assert_eq!(code(&dispersion(&["gen", "--spec", "gen:worstcase:7", "--out", &p])), 0);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("7 "));
    let run = dispersion(&["run", "--graph", &p, "--k", "7", "--trace", &dir.path().join("t").to_string_lossy()]);
    assert_eq!(code(&run), 0);
    let verify = dispersion(&["verify", "--trace", &dir.path().join("t").to_string_lossy(), "--graph", &p]);
    assert_eq!(code(&verify), 0);

    assert_eq!(code(&dispersion(&["gen", "--spec", "gen:ring:2", "--out", &p])), 3);
}
