//! Offline recommendation report: build a folder from a folder file, replay
//! its feedback and print successive batches as JSON.

use std::fs;
use std::io;
use std::path::Path;

use committee_core::{AuthorCard, Engine, FeedbackEvent, Folder, Warning};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input folder description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolderSpec {
    #[serde(default = "default_folder_id")]
    pub folder_id: String,
    #[serde(default)]
    pub topic: String,
    pub seed_paper_ids: Vec<String>,
    #[serde(default)]
    pub user_author_id: Option<String>,
    #[serde(default)]
    pub now_day: Option<i64>,
    /// Feedback applied, in order, before the first batch.
    #[serde(default)]
    pub events: Vec<FeedbackEvent>,
}

fn default_folder_id() -> String {
    "folder".into()
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read folder file: {0}")]
    Io(#[from] io::Error),
    #[error("invalid folder file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("invalid folder: {0}")]
    Folder(#[from] committee_core::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub batch: u64,
    pub model_version: u64,
    pub cards: Vec<AuthorCard>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub folder_id: String,
    pub seed: u64,
    pub now_day: i64,
    pub warnings: Vec<Warning>,
    pub batches: Vec<BatchReport>,
}

pub fn read_folder_spec(path: &Path) -> Result<FolderSpec, ReportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Deterministic for fixed `seed` and `now_day`.
pub fn recommend(engine: &Engine, spec: &FolderSpec, batches: usize, seed: u64, now_day: i64) -> Result<Report, ReportError> {
    let seeds: Vec<&str> = spec.seed_paper_ids.iter().map(String::as_str).collect();
    let (mut folder, warnings) = Folder::create(
        engine,
        &spec.folder_id,
        &spec.topic,
        &seeds,
        spec.user_author_id.as_deref(),
        seed,
        0,
        now_day,
    )?;
    for ev in &spec.events {
        folder.record_feedback(engine, ev, now_day)?;
    }
    let mut out = Vec::with_capacity(batches);
    for _ in 0..batches {
        let ts = folder.parts().last_timestamp;
        let cards = folder.load_batch(engine, ts)?;
        out.push(BatchReport {
            batch: folder.batch_state().batch_counter,
            model_version: folder.model_version(),
            cards,
        });
    }
    Ok(Report {
        folder_id: spec.folder_id.clone(),
        seed,
        now_day,
        warnings,
        batches: out,
    })
}
