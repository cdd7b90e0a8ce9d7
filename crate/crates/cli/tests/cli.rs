use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use npp::bench::{ingest_json, Ingested, CSV_HEADER};
use serde_json::Value;

fn npp() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_npp"));
    c.env_remove("NPP_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    npp().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "example.txt", "1\n1\n3\n4\n5\n6\n");
    let v = json(&run(&[
        "solve", &f, "--solver", "pipeline", "--m", "2", "--sub-solver", "exact", "--aux-solver", "exact",
        "--seed", "7", "--vector", "1,1,1,2,2,2",
    ]));
    assert_eq!(v["e_prime"], 2);
    let errors: Vec<u64> = v["per_k"].as_array().unwrap().iter().map(|s| s["e_k"].as_u64().unwrap()).collect();
    assert_eq!(errors, vec![1, 3]);
}

#[test]
fn single_weight() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "single.txt", "7\n");
    assert_eq!(json(&run(&["solve", &f, "--solver", "ldm"]))["energy"], 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let big: String = (1..=100).map(|i| format!("{i}\n")).collect();
    let f = write(dir.path(), "big.txt", &big);
    let out = run(&["solve", &f, "--solver", "exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at most 40"));

    assert_eq!(run(&["solve", &f, "--solver", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["solve", &f, "--solver", "pipeline"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let missing = dir.path().join("missing.txt");
    assert_eq!(run(&["solve", missing.to_str().unwrap(), "--solver", "ldm"]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.txt", "1\nx\n");
    assert_eq!(run(&["solve", &bad, "--solver", "ldm"]).status.code(), Some(3));
    let out = npp().env("NPP_WORKERS", "zero").args(["solve", &f, "--solver", "ldm"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stdout_is_ingestible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("gen.txt");
    let out = run(&["gen", "--n", "24", "--seed", "3", "--even-sum", "--out", inst.to_str().unwrap()]);
    assert!(matches!(ingest_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap(), Ingested::Instance(_)));
    let g = json(&out);
    assert!(g["weights"].as_array().unwrap().iter().all(|w| (120..=240).contains(&w.as_u64().unwrap())));
    assert_eq!(g["total"].as_u64().unwrap() % 2, 0);

    let f = inst.to_str().unwrap();
    for solver in ["exact", "greedy", "ldm", "sa"] {
        let out = run(&["solve", f, "--solver", solver, "--reads", "5", "--sweeps", "100"]);
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(matches!(ingest_json(&text).unwrap(), Ingested::Solve(_)), "{solver}");
    }
    let out = run(&["solve", f, "--solver", "pipeline", "--sub-size", "6", "--reads", "5", "--sweeps", "100"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(matches!(ingest_json(&text).unwrap(), Ingested::Pipeline(p) if p.m == 4));

    let out = run(&["analyze", "--n", "16", "--lambda", "16", "--empirical", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(matches!(ingest_json(&text).unwrap(), Ingested::Analysis(a) if a.empirical.as_ref().unwrap().counts.len() == 3));
}

#[test]
fn analyze_values() {
    let v = json(&run(&["analyze", "--n", "500", "--lambda", "5000"]));
    assert_eq!(v["max_m_bound"], 40);
    assert!((v["m_for_target"].as_f64().unwrap() - 40.69).abs() < 0.01);
    assert!(v["empirical"].is_null());
    assert_eq!(run(&["analyze", "--n", "30", "--lambda", "16", "--empirical", "1"]).status.code(), Some(2));
}

const GRID: &str = r#"{
    "n_values": [64, 128],
    "instances_per_n": 3,
    "runs_per_solver": 2,
    "master_seed": 11,
    "timing": "work",
    "solvers": [
        {"kind": "ldm"},
        {"kind": "greedy"},
        {"id": "OUR-SA-16", "kind": "pipeline", "sub": {"kind": "sa", "num_reads": 5, "num_sweeps": 100},
         "aux": {"kind": "sa", "num_reads": 5, "num_sweeps": 100}, "sub_size": 16}
    ]
}"#;

fn bench(config: &str, out: &Path, workers: &str) -> Output {
    run(&["bench", config, "--out", out.to_str().unwrap(), "--workers", workers])
}

#[test]
fn bench_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "grid.json", GRID);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let v = json(&bench(&config, &a, "1"));
    // 2 n values × 3 instances × (1 + 1 + 2) rows
    assert_eq!(v["rows"], 24);
    assert_eq!(v["errors"], 0);
    json(&bench(&config, &b, "4"));

    let csv_a = std::fs::read(a.join("runs.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("runs.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), 25);
    assert_eq!(text.lines().filter(|l| l.contains(",OUR-SA-16,")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.contains(",ldm,")).count(), 6);
    assert!(a.join("manifest.json").exists() && a.join("details.jsonl").exists() && a.join("summary.csv").exists());

    let capped = dir.path().join("c");
    let out = npp()
        .env("NPP_WORKERS", "1")
        .args(["bench", &config, "--out", capped.to_str().unwrap(), "--workers", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(capped.join("runs.csv")).unwrap(), std::fs::read(b.join("runs.csv")).unwrap());
}

#[test]
fn bench_merges_external_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "grid.json", r#"{"n_values": [64], "instances_per_n": 2, "solvers": [{"kind": "ldm"}]}"#);
    let external = write(
        dir.path(),
        "qb.csv",
        &format!("{}\n64,0,QB,0,4,false,,,100,100,120,1\n64,0,QB,1,0,true,,,90,90,100,2\n", CSV_HEADER.join(",")),
    );
    let out = dir.path().join("out");
    let v = json(&run(&[
        "bench", &config, "--out", out.to_str().unwrap(), "--merge", &external,
    ]));
    let solvers: Vec<&str> = v["summary"].as_array().unwrap().iter().map(|r| r["solver"].as_str().unwrap()).collect();
    assert_eq!(solvers, vec!["QB", "ldm"]);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("64,QB,2,0,")));
}

#[test]
fn bench_without_solvers_writes_manifest_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "empty.json", r#"{"n_values": [64], "instances_per_n": 2, "solvers": []}"#);
    let out = dir.path().join("out");
    assert_eq!(json(&bench(&config, &out, "2"))["rows"], 0);
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec!["manifest.json"]);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["instances"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "grid.json", GRID);
    let blocker = write(dir.path(), "file", "");
    assert_eq!(bench(&config, Path::new(&blocker), "1").status.code(), Some(3));
    let bad = write(dir.path(), "bad.json", r#"{"instances_per_n": 0}"#);
    assert_eq!(bench(&bad, &dir.path().join("x"), "1").status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(bench(missing.to_str().unwrap(), &dir.path().join("y"), "1").status.code(), Some(3));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_sampler_round_trip() {
    let mut child = npp()
        .args(["serve-sampler", "--port", "0", "--sweeps", "200"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let _server = Server(child);
    let url: Value = serde_json::from_str(&line).unwrap();
    let url = url["url"].as_str().unwrap();

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "w.txt", "13\n4\n9\n22\n5\n8\n1\n17\n30\n2\n");
    for seed in ["1", "2", "3"] {
        let common = ["--seed", seed, "--reads", "8", "--sweeps", "200"];
        let remote = json(&run(&[&["solve", &f, "--solver", "remote", "--endpoint", url][..], &common[..]].concat()));
        let local = json(&run(&[&["solve", &f, "--solver", "sa"][..], &common[..]].concat()));
        assert_eq!(remote["partition"], local["partition"]);
        assert_eq!(remote["energy"], local["energy"]);
    }

    let out = run(&["solve", &f, "--solver", "remote", "--endpoint", "http://127.0.0.1:1/sample"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(run(&["solve", &f, "--solver", "remote"]).status.code(), Some(1));
    let taken = url.trim_start_matches("http://").trim_end_matches("/sample");
    let (host, port) = taken.rsplit_once(':').unwrap();
    let out = run(&["serve-sampler", "--host", host, "--port", port]);
    assert_eq!(out.status.code(), Some(3));
}
