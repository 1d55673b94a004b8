//! HTTP JSON API.
//!
//! Folders are independent; commands on one folder are serialized by its
//! mutex and run on the blocking pool. Mutating requests may carry a
//! `request_id`; a retried ID returns the stored response without touching
//! the folder again.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use committee_core::{Action, AuthorCard, AuthorHit, Engine, Error as CoreError, FeedbackEvent, Folder, Label, Warning};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{now_millis, ApiConfig};
use crate::corpus_file::load_corpus;
use crate::snapshot::{self, SnapshotError};

struct Slot {
    folder: Folder,
    flushed: usize,
}

pub struct AppState {
    engine: Arc<Engine>,
    config: ApiConfig,
    folders: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    replies: Mutex<HashMap<String, (StatusCode, Value)>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(engine: Engine, config: ApiConfig) -> Self {
        AppState {
            engine: Arc::new(engine),
            config,
            folders: RwLock::new(HashMap::new()),
            replies: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    /// Loads every snapshot in the configured directory. A missing or empty
    /// directory simply means no folders yet.
    pub fn restore(&self) -> Result<usize, SnapshotError> {
        let Some(dir) = &self.config.snapshot_dir else { return Ok(0) };
        if !dir.exists() {
            return Ok(0);
        }
        let folders = match snapshot::restore_dir(&self.engine, dir) {
            Ok(f) => f,
            Err(SnapshotError::Empty(_)) => return Ok(0),
            Err(e) => return Err(e),
        };
        let mut map = self.folders.write().unwrap();
        let n = folders.len();
        for folder in folders {
            let flushed = folder.trace().len();
            map.insert(folder.id().to_string(), Arc::new(Mutex::new(Slot { folder, flushed })));
        }
        Ok(n)
    }

    /// Writes every folder's snapshot and pending trace events.
    pub fn flush(&self) -> Result<(), SnapshotError> {
        let Some(dir) = &self.config.snapshot_dir else { return Ok(()) };
        for slot in self.folders.read().unwrap().values() {
            let mut s = slot.lock().unwrap();
            s.flushed = snapshot::persist(dir, &self.engine, &s.folder, s.flushed)?;
        }
        Ok(())
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ApiError> {
        self.folders
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown folder {id:?}")))
    }

    fn persist(&self, slot: &mut Slot) -> Result<(), ApiError> {
        if let Some(dir) = &self.config.snapshot_dir {
            slot.flushed = snapshot::persist(dir, &self.engine, &slot.folder, slot.flushed)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        }
        Ok(())
    }

    fn cached(&self, key: &Option<String>) -> Option<Response> {
        let key = key.as_ref()?;
        let (status, body) = self.replies.lock().unwrap().get(key)?.clone();
        Some((status, Json(body)).into_response())
    }

    fn remember(&self, key: Option<String>, status: StatusCode, body: Value) -> Response {
        if let Some(k) = key {
            self.replies.lock().unwrap().insert(k, (status, body.clone()));
        }
        (status, Json(body)).into_response()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match e {
            CoreError::UnknownPaper(_) | CoreError::UnknownAuthor(_) | CoreError::UnknownTag(_) => StatusCode::NOT_FOUND,
            CoreError::AuthorBlocked(_) | CoreError::LastPositive | CoreError::NonMonotonicTimestamp { .. } => {
                StatusCode::CONFLICT
            }
            CoreError::Corpus(_) | CoreError::EmptyCorpus => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type Shared = Arc<AppState>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn timestamp(folder: &Folder) -> u64 {
    now_millis().max(folder.parts().last_timestamp)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FolderView {
    pub folder_id: String,
    pub topic: String,
    pub model_version: u64,
    pub seed_paper_ids: Vec<String>,
    pub saved_paper_ids: Vec<String>,
    pub downvoted_paper_ids: Vec<String>,
    pub committee: Vec<String>,
    pub blocked: Vec<String>,
    pub user_author_id: Option<String>,
    pub batches_served: u64,
}

impl FolderView {
    pub fn of(engine: &Engine, folder: &Folder) -> Self {
        let c = &engine.corpus;
        let papers = |v: Vec<committee_core::PaperIdx>| v.into_iter().map(|p| c.paper(p).id.clone()).collect();
        let fb = folder.feedback();
        FolderView {
            folder_id: folder.id().to_string(),
            topic: folder.topic().to_string(),
            model_version: folder.model_version(),
            seed_paper_ids: papers(fb.seeds().iter().copied().collect()),
            saved_paper_ids: papers(fb.with_label(Label::Saved)),
            downvoted_paper_ids: papers(fb.with_label(Label::Downvoted)),
            committee: folder.committee().iter().map(|&a| c.author(a).id.clone()).collect(),
            blocked: folder.blocked().iter().map(|&a| c.author(a).id.clone()).collect(),
            user_author_id: folder.parts().user.map(|a| c.author(a).id.clone()),
            batches_served: folder.batch_state().batch_counter,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateFolder {
    #[serde(default)]
    pub folder_id: Option<String>,
    #[serde(default)]
    pub topic: String,
    pub seed_paper_ids: Vec<String>,
    #[serde(default)]
    pub user_author_id: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub request_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreatedFolder {
    pub folder: FolderView,
    pub warnings: Vec<Warning>,
}

async fn create_folder(State(st): State<Shared>, Json(req): Json<CreateFolder>) -> Result<Response, ApiError> {
    blocking(move || {
        let key = req.request_id.as_ref().map(|r| format!("create:{r}"));
        // Held across creation so concurrent retries cannot both create.
        let mut folders = st.folders.write().unwrap();
        if let Some(r) = st.cached(&key) {
            return Ok(r);
        }
        let id = match req.folder_id {
            Some(id) if !id.is_empty() => id,
            _ => loop {
                let id = format!("f{}", st.next_id.fetch_add(1, Ordering::Relaxed));
                if !folders.contains_key(&id) {
                    break id;
                }
            },
        };
        if folders.contains_key(&id) || !valid_folder_id(&id) {
            return Err(ApiError::new(StatusCode::CONFLICT, format!("folder id {id:?} is taken or invalid")));
        }
        let seeds: Vec<&str> = req.seed_paper_ids.iter().map(String::as_str).collect();
        let (folder, warnings) = Folder::create(
            &st.engine,
            &id,
            &req.topic,
            &seeds,
            req.user_author_id.as_deref(),
            req.seed.unwrap_or(st.config.seed),
            now_millis(),
            st.config.now_day(),
        )?;
        let mut slot = Slot { folder, flushed: 0 };
        st.persist(&mut slot)?;
        let body = CreatedFolder {
            folder: FolderView::of(&st.engine, &slot.folder),
            warnings,
        };
        folders.insert(id, Arc::new(Mutex::new(slot)));
        Ok(st.remember(key, StatusCode::CREATED, json!(body)))
    })
    .await
}

/// Folder IDs double as file names.
fn valid_folder_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

async fn get_folder(State(st): State<Shared>, Path(id): Path<String>) -> Result<Json<FolderView>, ApiError> {
    let slot = st.slot(&id)?;
    let s = slot.lock().unwrap();
    Ok(Json(FolderView::of(&st.engine, &s.folder)))
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub action: Action,
    pub subject_id: String,
    #[serde(default)]
    pub request_id: Option<String>,
}

async fn post_feedback(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<FeedbackRequest>,
) -> Result<Response, ApiError> {
    let slot = st.slot(&id)?;
    blocking(move || {
        let mut s = slot.lock().unwrap();
        let key = req.request_id.as_ref().map(|r| format!("feedback:{id}:{r}"));
        if let Some(r) = st.cached(&key) {
            return Ok(r);
        }
        let event = FeedbackEvent {
            action: req.action,
            subject_id: req.subject_id,
            timestamp: timestamp(&s.folder),
        };
        s.folder.record_feedback(&st.engine, &event, st.config.now_day())?;
        st.persist(&mut s)?;
        let body = json!(FolderView::of(&st.engine, &s.folder));
        Ok(st.remember(key, StatusCode::OK, body))
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
pub struct BatchRequest {
    #[serde(default)]
    pub request_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchResponse {
    pub model_version: u64,
    pub batch: u64,
    pub cards: Vec<AuthorCard>,
}

async fn post_batch(
    State(st): State<Shared>,
    Path(id): Path<String>,
    req: Option<Json<BatchRequest>>,
) -> Result<Response, ApiError> {
    let slot = st.slot(&id)?;
    let req = req.map(|Json(r)| r).unwrap_or_default();
    blocking(move || {
        let mut s = slot.lock().unwrap();
        let key = req.request_id.as_ref().map(|r| format!("batch:{id}:{r}"));
        if let Some(r) = st.cached(&key) {
            return Ok(r);
        }
        let ts = timestamp(&s.folder);
        let cards = s.folder.load_batch(&st.engine, ts)?;
        st.persist(&mut s)?;
        let body = BatchResponse {
            model_version: s.folder.model_version(),
            batch: s.folder.batch_state().batch_counter,
            cards,
        };
        Ok(st.remember(key, StatusCode::OK, json!(body)))
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct AuthorQuery {
    #[serde(default)]
    pub tag: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuthorResponse {
    pub model_version: u64,
    pub card: AuthorCard,
}

async fn get_author(
    State(st): State<Shared>,
    Path((id, aid)): Path<(String, String)>,
    Query(q): Query<AuthorQuery>,
) -> Result<Json<AuthorResponse>, ApiError> {
    let slot = st.slot(&id)?;
    blocking(move || {
        let mut s = slot.lock().unwrap();
        let ts = timestamp(&s.folder);
        let card = s.folder.open_author(&st.engine, &aid, q.tag, ts)?;
        st.persist(&mut s)?;
        Ok(Json(AuthorResponse {
            model_version: s.folder.model_version(),
            card,
        }))
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct SearchQuery {
    #[serde(default)]
    pub q: String,
    /// Records the search in this folder's trace.
    #[serde(default)]
    pub folder_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<AuthorHit>,
}

async fn search(State(st): State<Shared>, Query(q): Query<SearchQuery>) -> Result<Json<SearchResponse>, ApiError> {
    let results = match &q.folder_id {
        Some(id) => {
            let slot = st.slot(id)?;
            let st = st.clone();
            blocking(move || {
                let mut s = slot.lock().unwrap();
                let ts = timestamp(&s.folder);
                let hits = s.folder.search_authors(&st.engine, &q.q, ts)?;
                st.persist(&mut s)?;
                Ok(hits)
            })
            .await?
        }
        None => committee_core::session::search_authors(&st.engine.corpus, &q.q),
    };
    Ok(Json(SearchResponse { results }))
}

async fn health(State(st): State<Shared>) -> Json<Value> {
    let c = &st.engine.corpus;
    Json(json!({
        "status": "ok",
        "papers": c.num_papers(),
        "authors": c.num_authors(),
        "embedding_dim": c.embedding_dim(),
        "dangling_ref_count": c.dangling_ref_count(),
        "folders": st.folders.read().unwrap().len(),
    }))
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/folders", post(create_folder))
        .route("/folders/{id}", get(get_folder))
        .route("/folders/{id}/feedback", post(post_feedback))
        .route("/folders/{id}/batches", post(post_batch))
        .route("/folders/{id}/authors/{aid}", get(get_author))
        .route("/search/authors", get(search))
        .with_state(state)
}

/// Loads the corpus, restores snapshots and serves until Ctrl-C, then
/// flushes every folder.
pub async fn serve(config: ApiConfig) -> anyhow::Result<()> {
    let corpus_path: PathBuf = config.corpus_path.clone();
    let corpus = load_corpus(&corpus_path).map_err(|e| anyhow::anyhow!("{}: {e}", corpus_path.display()))?;
    let engine = Engine::new(corpus, config.engine_config());
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let state = Arc::new(AppState::new(engine, config));
    let restored = state.restore()?;
    tracing::info!(restored, "folders restored");
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    state.flush()?;
    Ok(())
}
