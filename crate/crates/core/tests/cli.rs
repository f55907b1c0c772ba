use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-qap")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sparse-qap-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn generate_is_deterministic() {
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for p in [&a, &b] {
        let out = bin(&["generate", "--n", "5", "--seed", "1", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["n"], 5);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["generate", "--n", "0"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["solve", "--instance", "/nonexistent/x.json"]).status.code(), Some(4));

    let big = scratch("big.json");
    assert!(bin(&["generate", "--n", "11", "--out", big.to_str().unwrap()]).status.success());
    let out = bin(&["solve", "--instance", big.to_str().unwrap(), "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3));

    let small = scratch("small.json");
    bin(&["generate", "--n", "3", "--out", small.to_str().unwrap()]);
    let out = bin(&["solve", "--instance", small.to_str().unwrap(), "--method", "annealing"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["generate", "--n", "3", "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn single_item_scores_agree_across_methods() {
    let path = scratch("one.json");
    bin(&["generate", "--n", "1", "--seed", "3", "--out", path.to_str().unwrap()]);
    let scores: Vec<f64> = ["ohzeki-bfha", "qubo-direct", "exact"]
        .iter()
        .map(|m| {
            let out = bin(&["solve", "--instance", path.to_str().unwrap(), "--method", m, "--num-reads", "20"]);
            assert!(out.status.success());
            let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
            assert_eq!(v["feasible"], true);
            v["score"].as_f64().unwrap()
        })
        .collect();
    assert!(scores.iter().all(|&s| s == scores[0]));
}

#[test]
fn violations_histogram_covers_every_read() {
    let path = scratch("v.json");
    bin(&["generate", "--n", "4", "--out", path.to_str().unwrap()]);
    let out = bin(&["violations", "--instance", path.to_str().unwrap(), "--num-reads", "64", "--sweeps", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    let total: usize = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 64);
}

#[test]
fn bench_repair_rows_and_byte_stable_output() {
    let args = ["bench-repair", "--sizes", "4,6", "--samples", "30", "--num-reads", "30", "--sweeps", "10", "--warmup", "1", "--omit-timing"];
    let a = bin(&args);
    let b = bin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for row in text.lines().skip(1) {
        let gap: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap >= 0.0);
    }
}

#[test]
fn report_writes_both_tables() {
    let dir = scratch("report");
    let out = bin(&[
        "report", "--sizes", "3", "--instances", "2", "--num-reads", "30", "--sweeps", "10",
        "--max-iters", "3", "--omit-timing", "--out", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    let rows = fs::read_to_string(dir.join("instances.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
}
