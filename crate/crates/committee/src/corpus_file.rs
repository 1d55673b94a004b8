//! JSON-lines corpus snapshots: one paper object per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use committee_core::{CorpusError, CorpusIndex, PaperRecord};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: CorpusError,
    },
}

impl LoadError {
    /// One-based line of the offending record, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Io(_) => None,
            LoadError::Parse { line, .. } | LoadError::Invalid { line, .. } => Some(*line),
        }
    }
}

/// Parses records, returning each with its one-based line number. Blank
/// lines are skipped.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<(usize, PaperRecord)>, LoadError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| LoadError::Parse { line: i + 1, source })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<CorpusIndex, LoadError> {
    let (lines, records): (Vec<usize>, Vec<PaperRecord>) = read_records(reader)?.into_iter().unzip();
    CorpusIndex::from_records(records).map_err(|source| LoadError::Invalid {
        line: lines[source.record()],
        source,
    })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<CorpusIndex, LoadError> {
    read_corpus(BufReader::new(File::open(path)?))
}

pub fn write_records<W: Write>(mut w: W, records: &[PaperRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_records(path: impl AsRef<Path>, records: &[PaperRecord]) -> io::Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}
