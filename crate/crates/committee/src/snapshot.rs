//! Folder snapshots (one JSON document per folder) and their trace logs
//! (append-only JSON lines).
//!
//! Snapshots store string IDs only, so they stay valid across corpus
//! reloads as long as the referenced papers and authors still exist.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use committee_core::feedback::Judgment;
use committee_core::recommender::RankedEntry;
use committee_core::{
    BatchState, CorpusIndex, Engine, FeedbackSet, Folder, FolderParts, Label, RankedAuthorList, Strategy, TraceEvent,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: corrupt snapshot: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: line {line}: corrupt trace event: {source}")]
    CorruptTrace {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("snapshot format version {found} is not supported (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("no folder snapshots in {0}")]
    Empty(PathBuf),
    #[error("snapshot refers to data missing from the corpus: {0}")]
    Engine(#[from] committee_core::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub paper_id: String,
    pub label: Label,
    pub timestamp: u64,
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub author_id: String,
    pub votes: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListRecord {
    pub strategy: Strategy,
    pub cursor: usize,
    pub entries: Vec<EntryRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub lists: Vec<ListRecord>,
    pub served: Vec<String>,
    pub batch_counter: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolderSnapshot {
    pub format_version: u32,
    pub folder_id: String,
    pub topic: String,
    pub seed: u64,
    pub now_day: i64,
    pub model_version: u64,
    pub last_timestamp: u64,
    pub user_author_id: Option<String>,
    pub seed_paper_ids: Vec<String>,
    pub seed_timestamp: u64,
    pub judgments: Vec<JudgmentRecord>,
    pub committee: Vec<String>,
    pub blocked: Vec<String>,
    pub batch: BatchRecord,
    /// Strategy behind each card of the last served batch.
    pub last_origins: BTreeMap<String, Strategy>,
}

impl FolderSnapshot {
    pub fn capture(corpus: &CorpusIndex, folder: &Folder) -> Self {
        let p = folder.parts();
        let pid = |i| corpus.paper(i).id.clone();
        let aid = |i| corpus.author(i).id.clone();
        let fb = &p.feedback;
        FolderSnapshot {
            format_version: FORMAT_VERSION,
            folder_id: p.id.clone(),
            topic: p.topic.clone(),
            seed: p.seed,
            now_day: p.now_day,
            model_version: p.model_version,
            last_timestamp: p.last_timestamp,
            user_author_id: p.user.map(aid),
            seed_paper_ids: fb.seeds().iter().map(|&i| pid(i)).collect(),
            seed_timestamp: fb.seed_timestamp(),
            judgments: fb
                .judgments()
                .iter()
                .map(|(&i, j)| JudgmentRecord {
                    paper_id: pid(i),
                    label: j.label,
                    timestamp: j.timestamp,
                    seq: j.seq,
                })
                .collect(),
            committee: p.committee.iter().map(|&a| aid(a)).collect(),
            blocked: p.blocked.iter().map(|&a| aid(a)).collect(),
            batch: BatchRecord {
                lists: p
                    .batch
                    .lists
                    .iter()
                    .map(|l| ListRecord {
                        strategy: l.strategy,
                        cursor: l.cursor,
                        entries: l
                            .entries
                            .iter()
                            .map(|e| EntryRecord {
                                author_id: aid(e.author),
                                votes: e.votes,
                            })
                            .collect(),
                    })
                    .collect(),
                served: p.batch.served.iter().map(|&a| aid(a)).collect(),
                batch_counter: p.batch.batch_counter,
            },
            last_origins: p.last_origins.iter().map(|(&a, &s)| (aid(a), s)).collect(),
        }
    }

    pub fn to_parts(&self, corpus: &CorpusIndex) -> Result<FolderParts, SnapshotError> {
        if self.format_version != FORMAT_VERSION {
            return Err(SnapshotError::Version {
                found: self.format_version,
            });
        }
        let paper = |id: &str| corpus.require_paper(id);
        let author = |id: &str| corpus.require_author(id);
        let seeds = self.seed_paper_ids.iter().map(|s| paper(s)).collect::<Result<_, _>>()?;
        let judgments = self
            .judgments
            .iter()
            .map(|j| {
                Ok((
                    paper(&j.paper_id)?,
                    Judgment {
                        label: j.label,
                        timestamp: j.timestamp,
                        seq: j.seq,
                    },
                ))
            })
            .collect::<Result<_, committee_core::Error>>()?;
        let lists = self
            .batch
            .lists
            .iter()
            .map(|l| {
                Ok(RankedAuthorList {
                    strategy: l.strategy,
                    cursor: l.cursor,
                    entries: l
                        .entries
                        .iter()
                        .map(|e| {
                            Ok(RankedEntry {
                                author: author(&e.author_id)?,
                                votes: e.votes,
                            })
                        })
                        .collect::<Result<_, committee_core::Error>>()?,
                })
            })
            .collect::<Result<_, committee_core::Error>>()?;
        Ok(FolderParts {
            id: self.folder_id.clone(),
            topic: self.topic.clone(),
            feedback: FeedbackSet::from_parts(seeds, self.seed_timestamp, judgments),
            committee: self.committee.iter().map(|a| author(a)).collect::<Result<_, _>>()?,
            blocked: self.blocked.iter().map(|a| author(a)).collect::<Result<_, _>>()?,
            user: self.user_author_id.as_deref().map(author).transpose()?,
            batch: BatchState {
                lists,
                served: self.batch.served.iter().map(|a| author(a)).collect::<Result<_, _>>()?,
                batch_counter: self.batch.batch_counter,
            },
            model_version: self.model_version,
            seed: self.seed,
            now_day: self.now_day,
            last_timestamp: self.last_timestamp,
            last_origins: self
                .last_origins
                .iter()
                .map(|(a, &s)| Ok((author(a)?, s)))
                .collect::<Result<_, committee_core::Error>>()?,
        })
    }
}

pub fn snapshot_path(dir: &Path, folder_id: &str) -> PathBuf {
    dir.join(format!("{folder_id}.json"))
}

pub fn trace_path(dir: &Path, folder_id: &str) -> PathBuf {
    dir.join(format!("{folder_id}.trace.jsonl"))
}

/// Writes the snapshot atomically (temp file, then rename).
pub fn save_snapshot(dir: &Path, snap: &FolderSnapshot) -> Result<(), SnapshotError> {
    fs::create_dir_all(dir)?;
    let path = snapshot_path(dir, &snap.folder_id);
    let tmp = path.with_extension("json.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut w, snap).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<FolderSnapshot, SnapshotError> {
    let file = File::open(path)?;
    let snap: FolderSnapshot = serde_json::from_reader(BufReader::new(file)).map_err(|source| SnapshotError::Corrupt {
        path: path.to_path_buf(),
        source,
    })?;
    if snap.format_version != FORMAT_VERSION {
        return Err(SnapshotError::Version {
            found: snap.format_version,
        });
    }
    Ok(snap)
}

pub fn append_trace(path: &Path, events: &[TraceEvent]) -> Result<(), SnapshotError> {
    if events.is_empty() {
        return Ok(());
    }
    let mut w = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
    for ev in events {
        serde_json::to_writer(&mut w, ev).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace log; a missing file is an empty trace.
pub fn read_trace(path: &Path) -> Result<Vec<TraceEvent>, SnapshotError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| SnapshotError::CorruptTrace {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

/// Persists a folder: the snapshot plus any trace events past `flushed`.
/// Returns the new flushed count.
pub fn persist(dir: &Path, engine: &Engine, folder: &Folder, flushed: usize) -> Result<usize, SnapshotError> {
    save_snapshot(dir, &FolderSnapshot::capture(&engine.corpus, folder))?;
    let trace = folder.trace();
    append_trace(&trace_path(dir, folder.id()), &trace[flushed.min(trace.len())..])?;
    Ok(trace.len())
}

/// Restores one folder with its trace; weights are retrained.
pub fn restore_folder(engine: &Engine, dir: &Path, folder_id: &str) -> Result<Folder, SnapshotError> {
    let snap = read_snapshot(&snapshot_path(dir, folder_id))?;
    let trace = read_trace(&trace_path(dir, folder_id))?;
    let folder = Folder::restore(engine, snap.to_parts(&engine.corpus)?)?;
    Ok(folder.with_trace(trace))
}

/// Restores every folder in `dir`, sorted by ID. A directory without
/// snapshots is an error.
pub fn restore_dir(engine: &Engine, dir: &Path) -> Result<Vec<Folder>, SnapshotError> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(id) = name.strip_suffix(".json") {
            ids.push(id.to_string());
        }
    }
    if ids.is_empty() {
        return Err(SnapshotError::Empty(dir.to_path_buf()));
    }
    ids.sort();
    ids.iter().map(|id| restore_folder(engine, dir, id)).collect()
}
