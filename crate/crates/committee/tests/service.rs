use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use committee::config::ApiConfig;
use committee::corpus_file::load_corpus;
use committee::service::{router, AppState};
use committee_core::Engine;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn state(snapshot_dir: Option<&Path>) -> Arc<AppState> {
    let config = ApiConfig {
        corpus_path: fixture("toy_graph_a.jsonl"),
        now_override: Some(19_600),
        snapshot_dir: snapshot_dir.map(Path::to_path_buf),
        ..ApiConfig::default()
    };
    let corpus = load_corpus(&config.corpus_path).unwrap();
    Arc::new(AppState::new(Engine::new(corpus, config.engine_config()), config))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &Router, id: &str, seeds: &[&str]) -> Value {
    let (status, body) = call(
        app,
        "POST",
        "/folders",
        Some(json!({"folder_id": id, "topic": "graph mining", "seed_paper_ids": seeds})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body
}

fn card_ids(batch: &Value) -> Vec<&str> {
    batch["cards"].as_array().unwrap().iter().map(|c| c["author_id"].as_str().unwrap()).collect()
}

#[tokio::test]
async fn health_reports_corpus() {
    let app = router(state(None));
    let (status, body) = call(&app, "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["papers"], 6);
    assert_eq!(body["authors"], 4);
    assert_eq!(body["dangling_ref_count"], 0);
    assert_eq!(body["folders"], 0);
}

#[tokio::test]
async fn create_warns_on_few_seeds_and_rejects_bad_input() {
    let app = router(state(None));
    let body = create(&app, "gm", &["P2", "P3"]).await;
    assert_eq!(body["folder"]["seed_paper_ids"], json!(["P2", "P3"]));
    assert_eq!(body["folder"]["model_version"], 0);
    assert_eq!(body["warnings"], json!([{"kind": "few_seeds", "given": 2, "recommended": 5}]));

    let (status, _) = call(&app, "POST", "/folders", Some(json!({"folder_id": "gm", "topic": "t", "seed_paper_ids": ["P1"]}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "POST", "/folders", Some(json!({"folder_id": "../x", "topic": "t", "seed_paper_ids": ["P1"]}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, body) = call(&app, "POST", "/folders", Some(json!({"topic": "t", "seed_paper_ids": ["P9"]}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("P9"));
    let (status, _) = call(&app, "POST", "/folders", Some(json!({"topic": "t", "seed_paper_ids": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "GET", "/folders/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn first_batch_and_feedback_flow() {
    let app = router(state(None));
    create(&app, "gm", &["P2", "P3"]).await;

    let (status, batch) = call(&app, "POST", "/folders/gm/batches", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(card_ids(&batch), ["A1", "A2", "A4"]);
    assert_eq!(batch["batch"], 1);
    let origins: Vec<&str> = batch["cards"].as_array().unwrap().iter().map(|c| c["strategy_origin"].as_str().unwrap()).collect();
    assert_eq!(origins, ["library_extracted", "library_extracted", "recent_relevant"]);

    let (status, view) = call(&app, "POST", "/folders/gm/feedback", Some(json!({"action": "save_author", "subject_id": "A1"}))).await;
    assert_eq!(status, StatusCode::OK, "{view}");
    assert_eq!(view["committee"], json!(["A1"]));
    assert_eq!(view["model_version"], 1);

    let (_, view) = call(&app, "POST", "/folders/gm/feedback", Some(json!({"action": "downvote_paper", "subject_id": "P6"}))).await;
    assert_eq!(view["downvoted_paper_ids"], json!(["P6"]));
    assert_eq!(view["model_version"], 2);

    // Saved authors are never served again.
    let (_, batch) = call(&app, "POST", "/folders/gm/batches", Some(json!({}))).await;
    assert!(!card_ids(&batch).contains(&"A1"));
    assert!(batch["cards"].as_array().unwrap().iter().all(|c| c["strategy_origin"].is_string()));

    let (status, view) = call(&app, "GET", "/folders/gm", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["batches_served"], 2);
}

#[tokio::test]
async fn feedback_errors_map_to_statuses() {
    let app = router(state(None));
    create(&app, "gm", &["P2"]).await;
    let post = |action: &str, subject: &str| json!({"action": action, "subject_id": subject});

    let (status, _) = call(&app, "POST", "/folders/gm/feedback", Some(post("save_paper", "P404"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/folders/gm/feedback", Some(post("save_author", "A404"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(&app, "POST", "/folders/gm/feedback", Some(post("downvote_paper", "P2"))).await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
    let (status, _) = call(&app, "POST", "/folders/gm/feedback", Some(post("load_batch", "x"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/folders/gm/feedback", Some(post("block_author", "A3"))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", "/folders/gm/feedback", Some(post("save_author", "A3"))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, view) = call(&app, "GET", "/folders/gm", None).await;
    assert_eq!(view["blocked"], json!(["A3"]));
    assert_eq!(view["saved_paper_ids"], json!(["P2"]));
    assert_eq!(view["model_version"], 1);
}

#[tokio::test]
async fn request_ids_make_calls_idempotent() {
    let app = router(state(None));
    let req = json!({"folder_id": "gm", "topic": "t", "seed_paper_ids": ["P2"], "request_id": "c1"});
    let (s1, b1) = call(&app, "POST", "/folders", Some(req.clone())).await;
    let (s2, b2) = call(&app, "POST", "/folders", Some(req)).await;
    assert_eq!((s1, s2), (StatusCode::CREATED, StatusCode::CREATED));
    assert_eq!(b1, b2);

    let fb = json!({"action": "save_paper", "subject_id": "P3", "request_id": "r1"});
    let (_, v1) = call(&app, "POST", "/folders/gm/feedback", Some(fb.clone())).await;
    let (_, v2) = call(&app, "POST", "/folders/gm/feedback", Some(fb)).await;
    assert_eq!(v1, v2);
    assert_eq!(v2["model_version"], 1);

    let (_, a) = call(&app, "POST", "/folders/gm/batches", Some(json!({"request_id": "b1"}))).await;
    let (_, b) = call(&app, "POST", "/folders/gm/batches", Some(json!({"request_id": "b1"}))).await;
    assert_eq!(a, b);
    let (_, view) = call(&app, "GET", "/folders/gm", None).await;
    assert_eq!(view["batches_served"], 1);
}

#[tokio::test]
async fn author_details_and_tag_selection() {
    let app = router(state(None));
    create(&app, "gm", &["P2", "P3"]).await;
    call(&app, "POST", "/folders/gm/feedback", Some(json!({"action": "save_author", "subject_id": "A3"}))).await;

    let (status, body) = call(&app, "GET", "/folders/gm/authors/A1", None).await;
    assert_eq!(status, StatusCode::OK);
    let card = &body["card"];
    assert_eq!(card["author_id"], "A1");
    assert_eq!(card["total_paper_count"], 2);
    // A3's P4 cites P2; P1 is only cited by A1 and A2.
    assert_eq!(card["tags"][0]["kind"], "cited_by");
    assert_eq!(card["tags"][0]["committee_author_id"], "A3");
    assert_eq!(card["tags"][0]["evidence_paper_ids"], json!(["P2"]));
    assert_eq!(card["relevance_ratio"], 0.5);

    let (status, body) = call(&app, "GET", "/folders/gm/authors/A1?tag=0", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["card"]["selected_tag"], 0);
    let shown: Vec<&str> = ["judged_stack", "ranked"]
        .iter()
        .flat_map(|k| body["card"]["publications"][*k].as_array().unwrap())
        .map(|p| p["paper_id"].as_str().unwrap())
        .collect();
    assert_eq!(shown, ["P2"]);

    let (status, _) = call(&app, "GET", "/folders/gm/authors/A1?tag=5", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/folders/gm/authors/A9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn search_finds_authors() {
    let app = router(state(None));
    let (status, body) = call(&app, "GET", "/search/authors?q=a3", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["results"][0]["author_id"], "A3");
    assert_eq!(body["results"][0]["paper_count"], 2);
    let (status, _) = call(&app, "GET", "/search/authors?q=a&folder_id=nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_folders_do_not_interfere() {
    let app = router(state(None));
    create(&app, "one", &["P2", "P3"]).await;
    create(&app, "two", &["P5", "P6"]).await;

    let mut tasks = Vec::new();
    for (folder, author) in [("one", "A1"), ("two", "A3")] {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            for _ in 0..5 {
                call(&app, "POST", &format!("/folders/{folder}/batches"), None).await;
            }
            call(&app, "POST", &format!("/folders/{folder}/feedback"), Some(json!({"action": "save_author", "subject_id": author}))).await
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    let (_, one) = call(&app, "GET", "/folders/one", None).await;
    let (_, two) = call(&app, "GET", "/folders/two", None).await;
    assert_eq!(one["committee"], json!(["A1"]));
    assert_eq!(two["committee"], json!(["A3"]));
    assert_eq!(one["saved_paper_ids"], json!(["P2", "P3"]));
    assert_eq!(two["saved_paper_ids"], json!(["P5", "P6"]));
    assert_eq!(one["batches_served"], 5);
    assert_eq!(two["batches_served"], 5);
}

#[tokio::test]
async fn snapshots_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(state(Some(dir.path())));
    create(&app, "gm", &["P2", "P3"]).await;
    call(&app, "POST", "/folders/gm/feedback", Some(json!({"action": "save_author", "subject_id": "A1"}))).await;
    let (_, before) = call(&app, "GET", "/folders/gm", None).await;

    let restarted = state(Some(dir.path()));
    assert_eq!(restarted.restore().unwrap(), 1);
    let app2 = router(restarted);
    let (status, after) = call(&app2, "GET", "/folders/gm", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);

    let (_, b1) = call(&app, "POST", "/folders/gm/batches", None).await;
    let (_, b2) = call(&app2, "POST", "/folders/gm/batches", None).await;
    assert_eq!(b1, b2);
}
