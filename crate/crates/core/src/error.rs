use alloc::string::String;

use thiserror::Error;

/// Problems found while building a [`CorpusIndex`](crate::CorpusIndex).
///
/// `record` is the zero-based position of the offending record in the input
/// sequence; file loaders translate it back to a line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("record {record}: duplicate paper id {paper_id:?}")]
    DuplicatePaper { record: usize, paper_id: String },
    #[error("record {record}: paper {paper_id:?} has no authors")]
    NoAuthors { record: usize, paper_id: String },
    #[error("record {record}: paper {paper_id:?} lists author {author_id:?} twice")]
    DuplicateAuthor {
        record: usize,
        paper_id: String,
        author_id: String,
    },
    #[error("record {record}: paper {paper_id:?} references itself")]
    SelfReference { record: usize, paper_id: String },
    #[error("record {record}: paper {paper_id:?} has embedding dimension {found}, expected {expected}")]
    EmbeddingDimension {
        record: usize,
        paper_id: String,
        expected: usize,
        found: usize,
    },
    #[error("record {record}: paper {paper_id:?} has a non-finite or empty embedding")]
    BadEmbedding { record: usize, paper_id: String },
    #[error("record {record}: empty paper id")]
    EmptyPaperId { record: usize },
}

impl CorpusError {
    pub fn record(&self) -> usize {
        match self {
            CorpusError::DuplicatePaper { record, .. }
            | CorpusError::NoAuthors { record, .. }
            | CorpusError::DuplicateAuthor { record, .. }
            | CorpusError::SelfReference { record, .. }
            | CorpusError::EmbeddingDimension { record, .. }
            | CorpusError::BadEmbedding { record, .. }
            | CorpusError::EmptyPaperId { record } => *record,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("unknown paper {0:?}")]
    UnknownPaper(String),
    #[error("unknown author {0:?}")]
    UnknownAuthor(String),
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("no positive examples to train on")]
    NoPositives,
    #[error("a folder needs at least one seed paper")]
    NoSeeds,
    #[error("author {0:?} is blocked in this folder")]
    AuthorBlocked(String),
    #[error("feedback would leave the folder without a relevant paper")]
    LastPositive,
    #[error("timestamp {got} precedes the last recorded event ({last})")]
    NonMonotonicTimestamp { last: u64, got: u64 },
    #[error("action {0} does not modify folder state")]
    NotFeedback(&'static str),
    #[error("tag {0} does not exist on this card")]
    UnknownTag(usize),
}
