//! Author-centric literature discovery engine.
//!
//! A topic folder keeps a user-curated *committee* of authors, a set of
//! judged papers and a linear relevance model that is retrained on every
//! feedback event. Four strategies source candidate authors (library
//! extraction, recent relevant papers, coauthorship expansion and citation
//! expansion); candidates are served in small interleaved batches, each card
//! carrying coauthored-with / cited-by evidence.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence,
//! the HTTP surface and the CLI live in the `committee` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod explainer;
pub mod feedback;
pub mod recommender;
pub mod scorer;
pub mod session;

pub use corpus::{Author, AuthorIdx, AuthorRecord, CorpusIndex, Paper, PaperIdx, PaperRecord};
pub use error::{CorpusError, Error};
pub use explainer::{AuthorCard, ExplanationTag, TagKind};
pub use feedback::{FeedbackSet, Label};
pub use recommender::{BatchState, RankedAuthorList, Strategy, StrategyParams};
pub use scorer::{RelevanceModel, ScoreTable, ScorerConfig, TextFeatures};
pub use session::{
    Action, AuthorHit, Engine, EngineConfig, FeedbackEvent, Folder, FolderParts, TraceContext, TraceEvent, Warning,
};
