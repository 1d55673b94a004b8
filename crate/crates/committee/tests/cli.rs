use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn committee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_committee"))
        .args(args)
        .env_remove("COMMITTEE_CONFIG")
        .output()
        .unwrap()
}

fn recommend(folder: &Path, extra: &[&str]) -> Output {
    let corpus = fixture("toy_graph_a.jsonl");
    let mut args = vec!["recommend", "--corpus", corpus.to_str().unwrap(), "--folder", folder.to_str().unwrap()];
    args.extend_from_slice(extra);
    committee(&args)
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn recommend_matches_golden() {
    let out = json(&recommend(&fixture("folder_graph_mining.json"), &["--batches", "2"]));
    let golden: Value = serde_json::from_str(&fs::read_to_string(fixture("recommend_golden.json")).unwrap()).unwrap();
    assert_eq!(out, golden);

    // Independent of the golden file: library authors of P2 and P3 plus the
    // one author published in the last 180 days, all with ratio 0 and so in
    // ID order.
    let cards = out["batches"][0]["cards"].as_array().unwrap();
    let got: Vec<(&str, &str)> = cards
        .iter()
        .map(|c| (c["author_id"].as_str().unwrap(), c["strategy_origin"].as_str().unwrap()))
        .collect();
    assert_eq!(
        got,
        [("A1", "library_extracted"), ("A2", "library_extracted"), ("A4", "recent_relevant")]
    );
    assert!(cards.iter().all(|c| c["tags"].as_array().unwrap().is_empty() && c["relevance_ratio"] == 0.0));
    assert_eq!(out["batches"][1]["cards"].as_array().unwrap().len(), 0);
    assert_eq!(out["warnings"][0]["kind"], "few_seeds");
}

#[test]
fn recommend_is_deterministic_and_accepts_zero_batches() {
    let folder = fixture("folder_graph_mining.json");
    let a = recommend(&folder, &["--batches", "3", "--seed", "4"]);
    let b = recommend(&folder, &["--batches", "3", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let zero = json(&recommend(&folder, &["--batches", "0"]));
    assert_eq!(zero["batches"], Value::Array(vec![]));
}

#[test]
fn recommend_applies_folder_events() {
    let dir = tempfile::tempdir().unwrap();
    let folder = dir.path().join("folder.json");
    fs::write(
        &folder,
        r#"{"seed_paper_ids": ["P2", "P3"], "now_day": 19600,
            "events": [{"action": "save_author", "subject_id": "A1", "timestamp": 1}]}"#,
    )
    .unwrap();
    let out = json(&recommend(&folder, &[]));
    let batch = &out["batches"][0];
    assert_eq!(batch["model_version"], 1);
    let ids: Vec<&str> = batch["cards"].as_array().unwrap().iter().map(|c| c["author_id"].as_str().unwrap()).collect();
    assert!(!ids.contains(&"A1"));
    assert!(ids.contains(&"A2"));
}

#[test]
fn recommend_rejects_unknown_seed() {
    let dir = tempfile::tempdir().unwrap();
    let folder = dir.path().join("folder.json");
    fs::write(&folder, r#"{"seed_paper_ids": ["P2", "P99"]}"#).unwrap();
    let out = recommend(&folder, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P99"));

    fs::write(&folder, r#"{"seed_paper_ids": ["P2"], "colour": 1}"#).unwrap();
    assert_eq!(recommend(&folder, &[]).status.code(), Some(2));
    assert_eq!(recommend(&dir.path().join("missing.json"), &[]).status.code(), Some(1));
}

#[test]
fn ingest_reports_stats_and_bad_lines() {
    let ok = json(&committee(&["ingest", fixture("toy_graph_a.jsonl").to_str().unwrap()]));
    assert_eq!(ok["papers"], 6);
    assert_eq!(ok["authors"], 4);

    let bad = committee(&["ingest", fixture("bad_corpus.jsonl").to_str().unwrap()]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 3"));
}

#[test]
fn simulate_writes_corpus_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = json(&committee(&["simulate", "--out-dir", dir.path().to_str().unwrap(), "--steps", "0"]));
    assert!(out.is_object());
    let corpus = fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 2000);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().collect();
    assert!(rows[0].starts_with("policy,run_seed,batch,cards,community_hit_fraction"));
    assert_eq!(rows.len(), 2);

    // The generated corpus is itself ingestible.
    let stats = json(&committee(&["ingest", dir.path().join("corpus.jsonl").to_str().unwrap()]));
    assert_eq!(stats["papers"], 2000);
    assert_eq!(stats["authors"], 100);
    assert_eq!(stats["embedding_dim"], 16);
}
