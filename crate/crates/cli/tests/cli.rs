use std::fs;
use std::process::{Command, Output};

use gardenhose::{verify_solution, ConfigMatrix, Solution};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_gardenhose");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("GH_MEMORY_BUDGET").output().expect("run gardenhose")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).expect("JSON on stdout"))
}

fn text(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "m=4 k=2\nA=0-1 B=1-2\nA=0-2 B=1-2,3-4\n").unwrap();
    let garbled = dir.path().join("garbled.txt");
    fs::write(&garbled, "not a solution\n").unwrap();

    assert_eq!(code(&["simulate", "--m", "4", "--alice", "0-1,2-3", "--bob", "1-4"]), 0);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["search", "--m", "6", "--bob-hoses", "x"]), 2);
    assert_eq!(code(&["simulate", "--m", "4", "--alice", "0-x", "--bob", "1-4"]), 3);
    assert_eq!(code(&["verify", "--solution", garbled.to_str().unwrap()]), 3);
    assert_eq!(code(&["simulate", "--m", "4", "--alice", "1-2", "--bob", "1-4"]), 4);
    assert_eq!(code(&["search", "--m", "5", "--max-steps", "10"]), 4);
    assert_eq!(code(&["bound", "--m", "4", "--k", "1"]), 4);
    assert_eq!(code(&["verify", "--solution", bad.to_str().unwrap()]), 5);
    assert_eq!(code(&["--memory-budget", "1K", "matrix", "--m", "10"]), 6);
    assert_eq!(code(&["verify", "--solution", dir.path().join("missing").to_str().unwrap()]), 7);
}

#[test]
fn memory_budget_comes_from_the_environment() {
    let out = Command::new(BIN).args(["matrix", "--m", "10"]).env("GH_MEMORY_BUDGET", "1K").output().unwrap();
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn json_mirrors_the_text_report() {
    let args = ["simulate", "--m", "4", "--alice", "0-1,2-3", "--bob", "1-4"];
    let (c, v) = json(&args);
    assert_eq!(c, 0);
    assert_eq!(v["bit"], 1);
    assert_eq!(v["exit_side"], "Alice");
    assert_eq!(v["exit_pipe"], 4);
    let t = text(&args);
    assert!(t.contains("bit: 1"));
    assert!(t.contains("exit_side: Alice"));
    assert!(t.contains("exit_pipe: 4"));
    assert!(t.contains("path: 1 4"));

    let (c, v) = json(&["bound", "--m", "4", "--k", "6"]);
    assert_eq!(c, 0);
    let ratio = v["ratio"].as_f64().unwrap();
    assert!(text(&["bound", "--m", "4", "--k", "6"]).contains(&format!("ratio: {ratio:.6}")));

    let (c, v) = json(&["simulate", "--m", "4", "--alice", "1-2", "--bob", "1-4"]);
    assert_eq!(c, 4);
    assert_eq!(v["exit_code"], 4);
    assert!(v["error"].as_str().unwrap().contains("tap"));
}

#[test]
fn example_one_three_pipes() {
    let (_, v) = json(&["simulate", "--m", "3", "--alice", "0-1", "--bob", "1-3"]);
    assert_eq!((v["bit"].as_u64(), v["exit_side"].as_str()), (Some(1), Some("Alice")));
    let (_, v) = json(&["simulate", "--m", "3", "--alice", "0-3", "--bob", "1-2"]);
    assert_eq!(v["bit"], 0);
}

#[test]
fn matrix_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m4.txt");
    let (c, built) = json(&["matrix", "--m", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(c, 0);
    let parsed = ConfigMatrix::import(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed.rows.len() as u64, built["rows"].as_u64().unwrap());
    let (c, imported) = json(&["matrix", "--import", out.to_str().unwrap(), "--exact"]);
    assert_eq!(c, 0);
    let (_, inline) = json(&["matrix", "--m", "4"]);
    assert_eq!(imported["bits"], inline["bits"]);
    assert_eq!(imported["row_labels"], inline["row_labels"]);
    assert_eq!(imported["exact_max"], 6);
}

#[test]
fn search_verify_compose_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let best = dir.path().join("best.txt");
    let ledger = dir.path().join("runs.log");
    let (c, v) = json(&[
        "--ledger",
        ledger.to_str().unwrap(),
        "search",
        "--m",
        "6",
        "--seed",
        "3",
        "--max-steps",
        "200000",
        "--target",
        "15",
        "--out",
        best.to_str().unwrap(),
    ]);
    assert_eq!(c, 0);
    assert_eq!(v["best_k"], 15);
    assert_eq!(v["seed_generated"], false);
    let s = Solution::from_text(&fs::read_to_string(&best).unwrap()).unwrap();
    assert_eq!(s.k(), 15);

    let log = fs::read_to_string(&ledger).unwrap();
    let improvements: Vec<&str> = log.lines().filter(|l| !l.contains("cmd=") && l.contains(" m=6 t=")).collect();
    assert!(!improvements.is_empty());
    assert!(improvements.last().unwrap().ends_with("seed=3 k=15"));
    assert!(log.lines().last().unwrap().contains("cmd=search"));

    let (c, v) = json(&["verify", "--solution", best.to_str().unwrap()]);
    assert_eq!((c, v["ok"].as_bool(), v["antichain"].as_bool()), (0, Some(true), Some(true)));

    let composed = dir.path().join("composed.txt");
    let (c, v) = json(&["compose", "--solution", best.to_str().unwrap(), "--t", "2", "--out", composed.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["k"], 225);
    let s2 = Solution::from_text(&fs::read_to_string(&composed).unwrap()).unwrap();
    assert_eq!((s2.m, s2.k()), (12, 225));
    assert_eq!(verify_solution(&s2), Ok(()));
}

#[test]
fn omitted_seed_is_generated_and_reported() {
    let (c, v) = json(&["search", "--m", "4", "--max-steps", "1000"]);
    assert_eq!(c, 0);
    assert_eq!(v["seed_generated"], true);
    let seed = v["seed"].as_u64().unwrap().to_string();
    let (_, again) = json(&["search", "--m", "4", "--max-steps", "1000", "--seed", &seed]);
    assert_eq!(again["runs"], v["runs"]);
}

#[test]
fn group_generator_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("w2.txt");
    let (c, v) = json(&["group", "wreath", "--levels", "2", "--out", gens.to_str().unwrap()]);
    assert_eq!((c, v["generated_order"].as_u64()), (0, Some(81)));
    let (c, v) = json(&["group", "order", "--generators", gens.to_str().unwrap()]);
    assert_eq!((c, v["order"].as_u64()), (0, Some(81)));

    let w2 = dir.path().join("w2-generators.txt");
    fs::write(&w2, "degree: 10\n(3,5,10)\n(2,7,8)\n(1,2,3)(4,7,10)(5,6,8)\n").unwrap();
    let witness = dir.path().join("w2-solution.txt");
    let (c, v) = json(&["group", "w2", "--out", witness.to_str().unwrap()]);
    assert_eq!((c, v["classification"].as_str()), (0, Some("Strict")));
    let s = Solution::from_text(&fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!((s.k(), verify_solution(&s)), (81, Ok(())));
    let (c, v) = json(&["group", "classify", "--m", "10", "--t", "2", "--generators", w2.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["classification"], "Strict");
    assert_eq!(v["group_order"], 81);
}
