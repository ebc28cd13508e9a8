use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value as Json;
use sha2::{Digest, Sha256};

fn causalec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causalec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> String {
    scenario_dir().join(format!("{name}.json")).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_trace_and_report_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = causalec(&["run", &scenario("fig1"), "--seeds", "3..5", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("3/3 seeds passed"));
    for seed in 3..=5 {
        let trace = std::fs::read(dir.path().join(format!("fig1-seed{seed}.trace.jsonl"))).unwrap();
        let report: Json =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("fig1-seed{seed}.report.json"))).unwrap())
                .unwrap();
        assert_eq!(report["seed"], seed);
        assert_eq!(report["passed"], true);
        // The report's hash is recomputed here from the file bytes.
        let hex: String = Sha256::digest(&trace).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(report["trace_hash"], hex.as_str());
        for line in trace.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
            let rec: Json = serde_json::from_slice(line).unwrap();
            assert!(rec.get("time").is_some() && rec.get("event").is_some());
        }
    }
}

#[test]
fn same_seed_gives_identical_trace_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = causalec(&[
            "run",
            &scenario("fig1"),
            "--seeds",
            "7",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fig1-seed7.trace.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn json_format_reports_every_seed() {
    let o = causalec(&["run", &scenario("encoding_2"), "--seeds", "0..1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["scenario"], "encoding_2");
    assert_eq!(report["seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_coeffs_is_a_usage_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name":"bad","code":{"field_p":7},"workload":{"kind":"random","ops":2}}"#,
    )
    .unwrap();
    let o = causalec(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("`code`") && err.contains("coeffs"), "{err}");
}

#[test]
fn client_homed_outside_the_cluster_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name":"bad","code":{"coeffs":[[1],[1]]},"clients":[{"id":1,"home":3}],"workload":{"kind":"random","ops":2}}"#,
    )
    .unwrap();
    let o = causalec(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_protocol_is_a_usage_error() {
    let o = causalec(&["run", &scenario("fig1"), "--protocol", "paxos"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn protocol_override_changes_the_verdict() {
    let path = scenario("eventual_reorder");
    let ev = causalec(&["run", &path, "--protocol", "eventualec"]);
    assert_eq!(ev.status.code(), Some(1));
    assert!(stdout(&ev).contains("FAIL"));
    let causal = causalec(&["run", &path, "--protocol", "causalec"]);
    assert_eq!(causal.status.code(), Some(0), "{}", stdout(&causal));
}

#[test]
fn latency_of_the_example_network() {
    let o = causalec(&["latency", &scenario("fig1"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["code"]["worst"].as_f64().unwrap() - 4.5).abs() < 1e-9);
    assert!((r["code"]["average"].as_f64().unwrap() - 85.0 / 30.0).abs() < 1e-9);
    assert!((r["replication"]["best_worst"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    assert!((r["replication"]["best_average"].as_f64().unwrap() - 2.8).abs() < 1e-9);
    let table = stdout(&causalec(&["latency", &scenario("fig1")]));
    assert!(
        table.contains("worst 4.5000") && table.contains("average 2.8333"),
        "{table}"
    );
}

#[test]
fn single_server_single_object_latency_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    std::fs::write(
        &path,
        r#"{"name":"one","code":{"coeffs":[[1]]},"workload":{"kind":"random","ops":1}}"#,
    )
    .unwrap();
    let o = causalec(&["latency", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["code"]["worst"].as_f64(), Some(0.0));
    assert_eq!(r["code"]["average"].as_f64(), Some(0.0));
}

#[test]
fn scenarios_command_reproduces_the_committed_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = causalec(&["scenarios", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        let fresh = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        let committed = std::fs::read_to_string(scenario_dir().join(&name)).unwrap();
        assert_eq!(fresh, committed, "{name} differs from the committed copy");
    }
}

#[test]
fn fuzz_summary_is_clean_for_causalec() {
    let o = causalec(&["fuzz", "--runs", "40", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s["runs"], 40);
    assert_eq!(s["causal_failures"].as_array().unwrap().len(), 0);
    assert_eq!(s["locality_violations"], 0);
}
