use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exll::io::{save_model, write_features, write_manifest};
use exll::synthetic::{gaussian_blobs, BlobConfig};
use exll::Exll;

fn exll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exll")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

/// Writes a small blob dataset; returns (manifest, features).
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = BlobConfig { classes: 4, dim: 12, train_per_class: 30, test_per_class: 10, within_std: 0.05, instances_per_class: 3, seed: 5, ..Default::default() };
    let data = gaussian_blobs(&cfg).unwrap();
    let features = dir.join("features.bin");
    write_features(&features, data.features()).unwrap();
    let mut manifest = data.manifest().clone();
    manifest.feature_files = vec!["features.bin".into()];
    let path = dir.join("manifest.json");
    write_manifest(&path, &manifest).unwrap();
    (path, features)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_eval_explain_rules_topology() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, features) = fixture(dir.path());
    let model = dir.path().join("model.snap");
    let o = exll(&["train", "--manifest", s(&manifest), "--features", s(&features), "--ordering", "class-iid", "--seed", "3", "--out", s(&model)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("trained on 120 samples"));

    for mode in ["prinf", "mcinf", "fuse"] {
        let o = exll(&["eval", "--model", s(&model), "--manifest", s(&manifest), "--split", "test", "--inference", mode]);
        assert!(o.status.success());
        let out = stdout(&o);
        let line = out.lines().next().unwrap();
        let acc = line.split_whitespace().nth(1).unwrap();
        assert_eq!(acc.len(), 6, "four decimals expected in {line:?}");
        assert!(acc.parse::<f64>().unwrap() >= 0.9, "{mode}: {line}");
        assert!(line.ends_with("/40)"));
        assert!(out.contains("mean_max_probability"));
    }

    let o = exll(&["explain", "--model", s(&model), "--manifest", s(&manifest), "--query-id", "c2-test-4"]);
    assert!(o.status.success());
    let e: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e["query_id"], "c2-test-4");
    assert_eq!(e["predicted"], 2);
    assert!(!e["hits"].as_array().unwrap().is_empty());
    assert_eq!(e["schema_version"], 1);

    let o = exll(&["rules", "--model", s(&model)]);
    let rules: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let n_rules = rules["rules"].as_array().unwrap().len();
    let o = exll(&["topology", "--model", s(&model)]);
    let topo: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let nodes: usize = topo["classes"].as_array().unwrap().iter().map(|c| c["nodes"].as_array().unwrap().len()).sum();
    assert_eq!(n_rules, nodes + 4);
    assert_eq!(topo["dim"], 12);

    // Same seed, same bytes.
    let again = dir.path().join("again.snap");
    exll(&["train", "--manifest", s(&manifest), "--ordering", "class-iid", "--seed", "3", "--out", s(&again)]);
    assert_eq!(std::fs::read(&model).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn bench_writes_runs_and_average() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"learner": "exll-f", "manifest": "manifest.json", "ordering": "instance", "permutations": 3, "seed": 4}"#).unwrap();
    let csv = dir.path().join("summary.csv");
    let o = exll(&["bench", "--config", s(&cfg), "--jobs", "2", "--csv", s(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r["kind"] == "run").count(), 3);
    assert_eq!(rows[3]["kind"], "average");
    assert_eq!(rows[3]["seeds"], serde_json::json!([4, 5, 6]));
    assert_eq!(rows[0]["config"]["jobs"], 2);
    for r in &rows[..3] {
        assert_eq!(r["top1_accuracy"].as_f64().unwrap(), r["correct"].as_f64().unwrap() / r["total"].as_f64().unwrap());
    }
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("learner,ordering,kind,seeds,top1_accuracy,param_count,runtime_seconds,netscore"));
}

#[test]
fn baseline_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = fixture(dir.path());
    for learner in ["ncm", "slda", "perceptron", "nb"] {
        let o = exll(&["baseline", "--learner", learner, "--manifest", s(&manifest), "--ordering", "k-shot", "--k", "5", "--seed", "1"]);
        assert!(o.status.success(), "{learner}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("accuracy "));
        assert!(stdout(&o).contains("param_count "));
    }
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = fixture(dir.path());

    let empty = dir.path().join("empty.snap");
    save_model(&empty, &Exll::default()).unwrap();
    let o = exll(&["eval", "--model", s(&empty), "--manifest", s(&manifest), "--split", "test", "--inference", "fuse"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "EmptyModel");

    let o = exll(&["eval", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["error"], "Usage");

    let o = exll(&["rules", "--model", s(&dir.path().join("missing.snap"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "Io");

    let o = exll(&["train", "--manifest", s(&manifest), "--ordering", "sorted", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "InvalidConfig");

    // A snapshot whose prototype supports no longer add up.
    let model = dir.path().join("m.snap");
    exll(&["train", "--manifest", s(&manifest), "--out", s(&model)]);
    let mut snap: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let support = &mut snap["classes"][0]["prototypes"][0]["support"];
    *support = serde_json::json!(support.as_u64().unwrap() + 1);
    std::fs::write(&model, snap.to_string()).unwrap();
    let o = exll(&["rules", "--model", s(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"], "Invariant");
}
