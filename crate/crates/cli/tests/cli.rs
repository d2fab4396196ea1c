use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn causeway(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causeway"))
        .args(args)
        .current_dir(dir)
        .env_remove("CAUSEWAY_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = causeway(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str], dir: &Path) -> i32 {
    causeway(args, dir).status.code().unwrap()
}

fn manifest(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

// x -> y -> z with a key, a constant and a label column
fn chain_csv(n: usize) -> String {
    let mut s = String::from("serial,x,y,z,plant\n");
    let mut state = 12345u64;
    let mut unif = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    for i in 0..n {
        let mut normal = || (-2.0 * unif().ln()).sqrt() * (2.0 * std::f64::consts::PI * unif()).cos();
        let x = normal();
        let y = 0.8 * x + normal();
        let z = 0.8 * y + normal();
        s.push_str(&format!("{},{x},{y},{z},7\n", 1000 + i));
    }
    s
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("chain.csv"), chain_csv(20_000)).unwrap();
    fs::write(dir.path().join("tiers.tsv"), "column\ttier\nx\t0\ny\t1\nz\t2\n").unwrap();
    dir
}

#[test]
fn ingest_drops_and_reports_columns() {
    let dir = setup();
    let d = dir.path();
    ok(&["ingest", "chain.csv", "--out", "clean.csv"], d);
    let clean = fs::read_to_string(d.join("clean.csv")).unwrap();
    assert!(clean.starts_with("x,y,z\n"));
    let prov = fs::read_to_string(d.join("clean.csv.provenance.tsv")).unwrap();
    for col in ["serial", "x", "y", "z", "plant"] {
        assert!(prov.lines().any(|l| l.starts_with(&format!("{col}\t"))), "{col} missing from {prov}");
    }
    let m = manifest(d.join("clean.csv.manifest.json"));
    let input = fs::read(d.join("chain.csv")).unwrap();
    let want: String = Sha256::digest(&input).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(m["inputs"][0]["sha256"], Value::String(want));
    assert_eq!(m["command"], "ingest");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn discover_with_tiers_orients_the_chain() {
    let dir = setup();
    let d = dir.path();
    ok(
        &["discover", "chain.csv", "--alpha", "0.05", "--soe", "0.01", "--tiers", "tiers.tsv", "--out", "g", "--formats", "dot,json,graphml"],
        d,
    );
    let dot = fs::read_to_string(d.join("g.dot")).unwrap();
    assert!(dot.contains("\"x\" -> \"y\";") && dot.contains("\"y\" -> \"z\";"));
    assert!(!dot.contains("\"x\" -> \"z\""));
    assert!(d.join("g.graphml").exists());
    let g: Value = serde_json::from_str(&fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    assert_eq!(g["edges"].as_array().unwrap().len(), 2);
    let log = fs::read_to_string(d.join("g.log.tsv")).unwrap();
    assert!(log.contains("tier"));
    // without tiers the chain stays undirected
    ok(&["discover", "chain.csv", "--out", "u"], d);
    assert!(fs::read_to_string(d.join("u.dot")).unwrap().starts_with("graph G {"));
}

#[test]
fn fit_sample_score_round_trip() {
    let dir = setup();
    let d = dir.path();
    ok(&["discover", "chain.csv", "--tiers", "tiers.tsv", "--out", "g", "--formats", "json"], d);
    ok(&["fit", "chain.csv", "--graph", "g.json", "--out", "m.bn"], d);
    let model = fs::read_to_string(d.join("m.bn")).unwrap();
    assert_eq!(model.lines().count(), 4);
    ok(&["sample", "--model", "m.bn", "--n", "300", "--seed", "9", "--out", "s1.csv"], d);
    ok(&["sample", "--model", "m.bn", "--n", "300", "--seed", "9", "--out", "s2.csv"], d);
    ok(&["sample", "--model", "m.bn", "--n", "300", "--seed", "10", "--out", "s3.csv"], d);
    let s1 = fs::read(d.join("s1.csv")).unwrap();
    assert_eq!(s1, fs::read(d.join("s2.csv")).unwrap());
    assert_ne!(s1, fs::read(d.join("s3.csv")).unwrap());
    assert_eq!(manifest(d.join("s1.csv.manifest.json"))["seeds"], serde_json::json!([9]));

    ok(&["score", "--learned", "g.json", "--truth", "g.json", "--out", "r.json"], d);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["undirected_recall"], 1.0);
    assert_eq!(r["true_edges"], 2);
    // the pattern of the chain has no oriented edges, so directed recall is undefined
    assert_eq!(r["directed_recall"], Value::Null);
    ok(&["score", "--learned", "g.json", "--truth", "g.json", "--raw-truth", "--out", "r2.json"], d);
    let r2: Value = serde_json::from_str(&fs::read_to_string(d.join("r2.json")).unwrap()).unwrap();
    assert_eq!(r2["directed_recall"], 1.0);
}

#[test]
fn fit_needs_a_dag_unless_extending() {
    let dir = setup();
    let d = dir.path();
    ok(&["discover", "chain.csv", "--out", "u", "--formats", "json"], d);
    assert_eq!(code(&["fit", "chain.csv", "--graph", "u.json", "--out", "m.bn"], d), 1);
    ok(&["fit", "chain.csv", "--graph", "u.json", "--extend", "--seed", "3", "--out", "m.bn"], d);
}

#[test]
fn sweep_on_random_network() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &["sweep", "--random", "8", "--tier-blocks", "2", "--alphas", "0.01,0.1", "--soes", "0", "--replicates", "2", "--n", "500", "--out", "sw.tsv"],
        d,
    );
    let tsv = fs::read_to_string(d.join("sw.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 1 + 2 * 5);
    assert!(d.join("sw.model.bn").exists());
    let m = manifest(d.join("sw.tsv.manifest.json"));
    assert_eq!(m["seeds"], serde_json::json!([0, 1]));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("run.toml"), "alpha = 0.2\nsoe = 0.01\nformats = [\"json\"]\n").unwrap();
    ok(&["--config", "run.toml", "discover", "chain.csv", "--out", "a"], d);
    let m = manifest(d.join("a.manifest.json"));
    assert_eq!(m["config"]["pc"]["alpha"], 0.2);
    assert!(d.join("a.json").exists() && !d.join("a.dot").exists());
    ok(&["--config", "run.toml", "discover", "chain.csv", "--alpha", "0.01", "--out", "b"], d);
    let m = manifest(d.join("b.manifest.json"));
    assert_eq!(m["config"]["pc"]["alpha"], 0.01);
    assert_eq!(m["config"]["pc"]["soe"], 0.01);
}

#[test]
fn exit_codes_separate_bad_input_from_runtime_failures() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&["discover", "chain.csv", "--bogus"], d), 1);
    assert_eq!(code(&["discover", "chain.csv", "--alpha", "1.5", "--out", "g"], d), 1);
    assert_eq!(code(&["discover", "chain.csv", "--formats", "svg", "--out", "g"], d), 1);
    assert_eq!(code(&["cluster", "chain.csv", "--k", "9", "--out-dir", "c"], d), 1);
    fs::write(d.join("bad.csv"), "a,b\n1.5,2.5\n2.5,oops\n3.5,1.5\n").unwrap();
    let out = causeway(&["ingest", "bad.csv", "--out", "x.csv"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oops"));
    fs::write(d.join("typo.toml"), "alpah = 0.1\n").unwrap();
    assert_eq!(code(&["--config", "typo.toml", "discover", "chain.csv", "--out", "g"], d), 1);
    assert_eq!(code(&["ingest", "missing.csv", "--out", "x.csv"], d), 2);
    assert_eq!(code(&["--help"], d), 0);
}

#[test]
fn cluster_writes_medoids_and_reduced_table() {
    let dir = setup();
    let d = dir.path();
    ok(&["cluster", "chain.csv", "--k", "2", "--linkage", "average", "--out-dir", "c"], d);
    let medoids = fs::read_to_string(d.join("c/medoids.tsv")).unwrap();
    assert_eq!(medoids.lines().count(), 3);
    let reduced = fs::read_to_string(d.join("c/reduced.csv")).unwrap();
    assert_eq!(reduced.lines().next().unwrap().split(',').count(), 2);
    assert_eq!(fs::read_to_string(d.join("c/diagnostics.tsv")).unwrap().lines().count(), 4);
    assert!(d.join("c/manifest.json").exists());
}

fn run_demo(dir: &Path, threads: &str) -> Vec<(String, Vec<u8>)> {
    let out = Command::new(env!("CARGO_BIN_EXE_causeway"))
        .args(["pipeline", "--demo", "--synthetic", "--replicates", "2", "--n", "2000", "--formats", "dot,json", "--out-dir"])
        .arg(dir)
        .env("CAUSEWAY_THREADS", threads)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn demo_pipeline_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_demo(&dir.path().join("a"), "1");
    let b = run_demo(&dir.path().join("b"), "4");
    assert_eq!(a, b);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for f in ["graph.dot", "graph.json", "sweep.tsv", "model.bn", "normality.tsv", "edges-by-alpha.tsv", "provenance.tsv"] {
        assert!(names.contains(&f), "{f}");
    }
    let m1 = manifest(dir.path().join("a/manifest.json"));
    let m4 = manifest(dir.path().join("b/manifest.json"));
    assert_eq!(m1["threads"], 1);
    assert_eq!(m4["threads"], 4);
    assert_eq!(m1["config_sha256"], m4["config_sha256"]);
    let prov = String::from_utf8(a.iter().find(|(n, _)| n == "provenance.tsv").unwrap().1.clone()).unwrap();
    assert!(prov.contains("part_id\tdropped\tunique key"));
    assert!(prov.contains("line\tdropped\tzero variance"));
}
