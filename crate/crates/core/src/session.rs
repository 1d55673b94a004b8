//! Per-topic folder state: seeds, judgments, committee, blocked authors, the
//! current relevance model and batch state, plus an append-only trace of
//! every user action.
//!
//! A folder is driven by a single writer. All timestamps and the current day
//! are supplied by the caller, so replaying a trace reproduces the same
//! batches.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIdx, CorpusIndex, PaperIdx};
use crate::error::Error;
use crate::explainer::{all_evidence, build_card, select_tag, AuthorCard, TagKind};
use crate::feedback::{FeedbackSet, Label};
use crate::recommender::{BatchInputs, BatchState, Strategy, StrategyParams};
use crate::scorer::{Features, RelevanceModel, ScoreTable, ScorerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub scorer: ScorerConfig,
    pub strategy: StrategyParams,
    /// Publications shown per card before expanding.
    pub default_visible: usize,
    /// Seed count below which folder creation warns.
    pub recommended_seeds: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            scorer: ScorerConfig::default(),
            strategy: StrategyParams::default(),
            default_visible: 5,
            recommended_seeds: 5,
        }
    }
}

/// The shared, immutable part of the system: corpus, precomputed features
/// and configuration.
#[derive(Debug)]
pub struct Engine {
    pub corpus: CorpusIndex,
    pub features: Features,
    pub config: EngineConfig,
}

impl Engine {
    pub fn new(corpus: CorpusIndex, config: EngineConfig) -> Self {
        let features = Features::build(&corpus);
        Engine { corpus, features, config }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SavePaper,
    DownvotePaper,
    UndoPaper,
    SaveAuthor,
    BlockAuthor,
    RemoveAuthor,
    LoadBatch,
    OpenAuthorDetails,
    SearchAuthor,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::SavePaper => "save_paper",
            Action::DownvotePaper => "downvote_paper",
            Action::UndoPaper => "undo_paper",
            Action::SaveAuthor => "save_author",
            Action::BlockAuthor => "block_author",
            Action::RemoveAuthor => "remove_author",
            Action::LoadBatch => "load_batch",
            Action::OpenAuthorDetails => "open_author_details",
            Action::SearchAuthor => "search_author",
        }
    }

    /// Actions that change folder state and trigger a retrain.
    pub fn is_feedback(self) -> bool {
        matches!(
            self,
            Action::SavePaper
                | Action::DownvotePaper
                | Action::UndoPaper
                | Action::SaveAuthor
                | Action::BlockAuthor
                | Action::RemoveAuthor
        )
    }

    fn targets_paper(self) -> bool {
        matches!(self, Action::SavePaper | Action::DownvotePaper | Action::UndoPaper)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub action: Action,
    pub subject_id: String,
    pub timestamp: u64,
}

/// State captured alongside an action at the moment it happened.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceContext {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_origin: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coauthored_with: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cited_by: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub now_day: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub served: Vec<String>,
    pub model_version: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub timestamp: u64,
    pub folder_id: String,
    pub action: Action,
    pub subject_id: String,
    pub context: TraceContext,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    FewSeeds { given: usize, recommended: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorHit {
    pub author_id: String,
    pub display_name: String,
    pub paper_count: usize,
}

/// Everything persisted for a folder. Model weights are not part of it: they
/// are retrained from the feedback and seed on restore.
#[derive(Clone, Debug, PartialEq)]
pub struct FolderParts {
    pub id: String,
    pub topic: String,
    pub feedback: FeedbackSet,
    pub committee: Vec<AuthorIdx>,
    pub blocked: BTreeSet<AuthorIdx>,
    pub user: Option<AuthorIdx>,
    pub batch: BatchState,
    pub model_version: u64,
    pub seed: u64,
    pub now_day: i64,
    pub last_timestamp: u64,
    pub last_origins: BTreeMap<AuthorIdx, Strategy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Folder {
    parts: FolderParts,
    model: RelevanceModel,
    scores: ScoreTable,
    trace: Vec<TraceEvent>,
}

impl Folder {
    /// Creates a folder, trains the first model on the seeds and builds the
    /// initial strategy lists.
    #[allow(clippy::too_many_arguments)]
    pub fn create(
        engine: &Engine,
        id: &str,
        topic: &str,
        seed_ids: &[&str],
        user_id: Option<&str>,
        seed: u64,
        timestamp: u64,
        now_day: i64,
    ) -> Result<(Folder, Vec<Warning>), Error> {
        if seed_ids.is_empty() {
            return Err(Error::NoSeeds);
        }
        let seeds: BTreeSet<PaperIdx> = seed_ids
            .iter()
            .map(|s| engine.corpus.require_paper(s))
            .collect::<Result<_, _>>()?;
        let user = user_id.map(|u| engine.corpus.require_author(u)).transpose()?;
        let mut warnings = Vec::new();
        if seeds.len() < engine.config.recommended_seeds {
            warnings.push(Warning::FewSeeds {
                given: seeds.len(),
                recommended: engine.config.recommended_seeds,
            });
        }
        let parts = FolderParts {
            id: id.to_string(),
            topic: topic.to_string(),
            feedback: FeedbackSet::with_seeds(seeds, timestamp),
            committee: Vec::new(),
            blocked: BTreeSet::new(),
            user,
            batch: BatchState::default(),
            model_version: 0,
            seed,
            now_day,
            last_timestamp: timestamp,
            last_origins: BTreeMap::new(),
        };
        let mut folder = Folder::restore(engine, parts)?;
        let batch = BatchState::build(&folder.parts.inputs(engine, &folder.scores));
        folder.parts.batch = batch;
        Ok((folder, warnings))
    }

    /// Rebuilds a folder from persisted parts, retraining the model.
    pub fn restore(engine: &Engine, parts: FolderParts) -> Result<Folder, Error> {
        let model = train(engine, &parts.feedback, parts.seed)?;
        let scores = model.score_corpus(&engine.features);
        Ok(Folder {
            parts,
            model,
            scores,
            trace: Vec::new(),
        })
    }

    /// Attaches a previously recorded trace to a restored folder.
    pub fn with_trace(mut self, trace: Vec<TraceEvent>) -> Folder {
        self.trace = trace;
        self
    }

    pub fn parts(&self) -> &FolderParts {
        &self.parts
    }

    pub fn id(&self) -> &str {
        &self.parts.id
    }

    pub fn topic(&self) -> &str {
        &self.parts.topic
    }

    pub fn feedback(&self) -> &FeedbackSet {
        &self.parts.feedback
    }

    pub fn committee(&self) -> &[AuthorIdx] {
        &self.parts.committee
    }

    pub fn blocked(&self) -> &BTreeSet<AuthorIdx> {
        &self.parts.blocked
    }

    pub fn model(&self) -> &RelevanceModel {
        &self.model
    }

    pub fn scores(&self) -> &ScoreTable {
        &self.scores
    }

    pub fn model_version(&self) -> u64 {
        self.parts.model_version
    }

    pub fn batch_state(&self) -> &BatchState {
        &self.parts.batch
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    fn check_time(&self, timestamp: u64) -> Result<(), Error> {
        if timestamp < self.parts.last_timestamp {
            return Err(Error::NonMonotonicTimestamp {
                last: self.parts.last_timestamp,
                got: timestamp,
            });
        }
        Ok(())
    }

    fn push_trace(&mut self, timestamp: u64, action: Action, subject_id: String, context: TraceContext) {
        self.parts.last_timestamp = timestamp;
        self.trace.push(TraceEvent {
            timestamp,
            folder_id: self.parts.id.clone(),
            action,
            subject_id,
            context,
        });
    }

    fn author_context(&self, engine: &Engine, author: AuthorIdx) -> TraceContext {
        let evidence = all_evidence(&engine.corpus, author, &self.parts.committee);
        let count = |k: TagKind| evidence.iter().filter(|e| e.kind == k).count();
        TraceContext {
            strategy_origin: self.parts.last_origins.get(&author).copied(),
            coauthored_with: Some(count(TagKind::CoauthoredWith)),
            cited_by: Some(count(TagKind::CitedBy)),
            model_version: self.parts.model_version,
            ..Default::default()
        }
    }

    /// Applies a save/downvote/undo or author action, retrains the model and
    /// replenishes the strategy lists. On error the folder is unchanged.
    pub fn record_feedback(&mut self, engine: &Engine, event: &FeedbackEvent, now_day: i64) -> Result<(), Error> {
        if !event.action.is_feedback() {
            return Err(Error::NotFeedback(event.action.name()));
        }
        self.check_time(event.timestamp)?;
        let corpus = &engine.corpus;

        let mut feedback = self.parts.feedback.clone();
        let mut committee = self.parts.committee.clone();
        let mut blocked = self.parts.blocked.clone();
        let mut context;
        if event.action.targets_paper() {
            let p = corpus.require_paper(&event.subject_id)?;
            context = TraceContext {
                score: Some(self.scores.get(p)),
                ..Default::default()
            };
            match event.action {
                Action::SavePaper => feedback.set(p, Label::Saved, event.timestamp),
                Action::DownvotePaper => feedback.set(p, Label::Downvoted, event.timestamp),
                _ => {
                    feedback.clear(p);
                }
            }
            if feedback.positives().is_empty() {
                return Err(Error::LastPositive);
            }
            // Paper feedback may come from an author card; keep its origin.
            if let Some(origin) = corpus
                .paper(p)
                .authors
                .iter()
                .find_map(|a| self.parts.last_origins.get(a))
            {
                context.strategy_origin = Some(*origin);
            }
        } else {
            let a = corpus.require_author(&event.subject_id)?;
            context = self.author_context(engine, a);
            match event.action {
                Action::SaveAuthor => {
                    if blocked.contains(&a) {
                        return Err(Error::AuthorBlocked(event.subject_id.clone()));
                    }
                    if !committee.contains(&a) {
                        committee.push(a);
                    }
                }
                Action::BlockAuthor => {
                    committee.retain(|&x| x != a);
                    blocked.insert(a);
                }
                _ => {
                    committee.retain(|&x| x != a);
                    blocked.remove(&a);
                }
            }
        }

        let model = train(engine, &feedback, self.parts.seed)?;
        let scores = model.score_corpus(&engine.features);

        self.parts.feedback = feedback;
        self.parts.committee = committee;
        self.parts.blocked = blocked;
        self.parts.model_version += 1;
        self.parts.now_day = now_day;
        self.model = model;
        self.scores = scores;
        let mut batch = core::mem::take(&mut self.parts.batch);
        let inputs = self.parts.inputs(engine, &self.scores);
        batch.apply_feedback(&inputs);
        self.parts.batch = batch;

        context.now_day = Some(now_day);
        context.model_version = self.parts.model_version;
        self.push_trace(event.timestamp, event.action, event.subject_id.clone(), context);
        Ok(())
    }

    /// Serves the next batch of cards.
    pub fn load_batch(&mut self, engine: &Engine, timestamp: u64) -> Result<Vec<AuthorCard>, Error> {
        self.check_time(timestamp)?;
        let mut batch = core::mem::take(&mut self.parts.batch);
        let inputs = self.parts.inputs(engine, &self.scores);
        let cards = batch.generate_batch(&inputs);
        self.parts.batch = batch;
        self.parts.last_origins = cards
            .iter()
            .filter_map(|c| Some((engine.corpus.author_idx(&c.author_id)?, c.strategy_origin?)))
            .collect();
        let context = TraceContext {
            served: cards.iter().map(|c| c.author_id.clone()).collect(),
            model_version: self.parts.model_version,
            ..Default::default()
        };
        let subject = self.parts.batch.batch_counter.to_string();
        self.push_trace(timestamp, Action::LoadBatch, subject, context);
        Ok(cards)
    }

    /// Card for any author, with scores as of now, optionally narrowed to
    /// one of its tags.
    pub fn author_card(&self, engine: &Engine, author_id: &str, tag: Option<usize>) -> Result<AuthorCard, Error> {
        let a = engine.corpus.require_author(author_id)?;
        let relevance = self.scores.view(&self.parts.feedback);
        let mut card = build_card(
            &engine.corpus,
            a,
            self.parts.last_origins.get(&a).copied(),
            &self.parts.committee,
            &relevance,
            engine.config.default_visible,
        );
        if let Some(t) = tag {
            select_tag(&engine.corpus, &mut card, &relevance, t)?;
        }
        Ok(card)
    }

    /// [`author_card`](Self::author_card), recorded in the trace.
    pub fn open_author(
        &mut self,
        engine: &Engine,
        author_id: &str,
        tag: Option<usize>,
        timestamp: u64,
    ) -> Result<AuthorCard, Error> {
        self.check_time(timestamp)?;
        let card = self.author_card(engine, author_id, tag)?;
        let a = engine.corpus.require_author(author_id)?;
        let context = self.author_context(engine, a);
        self.push_trace(timestamp, Action::OpenAuthorDetails, author_id.to_string(), context);
        Ok(card)
    }

    pub fn search_authors(&mut self, engine: &Engine, query: &str, timestamp: u64) -> Result<Vec<AuthorHit>, Error> {
        self.check_time(timestamp)?;
        let hits = search_authors(&engine.corpus, query);
        let context = TraceContext {
            model_version: self.parts.model_version,
            ..Default::default()
        };
        self.push_trace(timestamp, Action::SearchAuthor, query.to_string(), context);
        Ok(hits)
    }

    /// Replays a recorded trace against this folder and returns every batch
    /// served along the way.
    pub fn replay(&mut self, engine: &Engine, events: &[TraceEvent]) -> Result<Vec<Vec<AuthorCard>>, Error> {
        let mut batches = Vec::new();
        for ev in events {
            match ev.action {
                Action::LoadBatch => batches.push(self.load_batch(engine, ev.timestamp)?),
                Action::OpenAuthorDetails => {
                    self.open_author(engine, &ev.subject_id, None, ev.timestamp)?;
                }
                Action::SearchAuthor => {
                    self.search_authors(engine, &ev.subject_id, ev.timestamp)?;
                }
                action => {
                    let event = FeedbackEvent {
                        action,
                        subject_id: ev.subject_id.clone(),
                        timestamp: ev.timestamp,
                    };
                    self.record_feedback(engine, &event, ev.context.now_day.unwrap_or(self.parts.now_day))?;
                }
            }
        }
        Ok(batches)
    }
}

impl FolderParts {
    fn inputs<'a>(&'a self, engine: &'a Engine, scores: &'a ScoreTable) -> BatchInputs<'a> {
        BatchInputs {
            corpus: &engine.corpus,
            relevance: scores.view(&self.feedback),
            committee: &self.committee,
            blocked: &self.blocked,
            user: self.user,
            now_day: self.now_day,
            params: &engine.config.strategy,
            default_visible: engine.config.default_visible,
        }
    }
}

fn train(engine: &Engine, feedback: &FeedbackSet, seed: u64) -> Result<RelevanceModel, Error> {
    RelevanceModel::train(&engine.corpus, &engine.features, feedback, seed, &engine.config.scorer)
}

pub fn search_authors(corpus: &CorpusIndex, query: &str) -> Vec<AuthorHit> {
    corpus
        .search_authors(query)
        .into_iter()
        .map(|a| {
            let author = corpus.author(a);
            AuthorHit {
                author_id: author.id.clone(),
                display_name: author.display_name.clone(),
                paper_count: author.papers.len(),
            }
        })
        .collect()
}
