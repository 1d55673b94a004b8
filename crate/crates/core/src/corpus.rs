//! Immutable bibliographic graph built from a snapshot of paper records.
//!
//! Papers and authors are interned into dense indices ordered by their
//! string IDs, so `PaperIdx`/`AuthorIdx` ordering coincides with ID ordering
//! and every tie-break on IDs can compare indices directly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CorpusError, Error};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaperIdx(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorIdx(pub u32);

impl PaperIdx {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl AuthorIdx {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// Optional per-author metadata carried alongside a paper record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub author_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_index: Option<u32>,
}

/// One line of the corpus snapshot.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    pub year: i32,
    pub pub_day: i64,
    pub author_ids: Vec<String>,
    #[serde(default)]
    pub reference_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub authors: Vec<AuthorRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Paper {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub year: i32,
    pub pub_day: i64,
    pub authors: Vec<AuthorIdx>,
    /// Sorted, deduplicated, dangling references removed.
    pub references: Vec<PaperIdx>,
    pub embedding: Option<Vec<f32>>,
}

impl Paper {
    pub fn has_author(&self, author: AuthorIdx) -> bool {
        self.authors.contains(&author)
    }

    pub fn cites(&self, paper: PaperIdx) -> bool {
        self.references.binary_search(&paper).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Author {
    pub id: String,
    pub display_name: String,
    /// Sorted by paper index.
    pub papers: Vec<PaperIdx>,
    pub h_index: Option<u32>,
    pub citation_count: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusIndex {
    papers: Vec<Paper>,
    authors: Vec<Author>,
    paper_lookup: BTreeMap<String, PaperIdx>,
    author_lookup: BTreeMap<String, AuthorIdx>,
    citing: Vec<Vec<PaperIdx>>,
    recency: Vec<PaperIdx>,
    embedding_dim: Option<usize>,
    dangling_ref_count: usize,
}

impl CorpusIndex {
    /// Builds every index from raw records. The result does not depend on the
    /// order of `records`.
    pub fn from_records(records: Vec<PaperRecord>) -> Result<Self, CorpusError> {
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| records[a].paper_id.cmp(&records[b].paper_id).then(a.cmp(&b)));

        let mut paper_lookup = BTreeMap::new();
        let mut embedding_dim: Option<(usize, usize)> = None;
        for (pos, &rec_i) in order.iter().enumerate() {
            let rec = &records[rec_i];
            if rec.paper_id.is_empty() {
                return Err(CorpusError::EmptyPaperId { record: rec_i });
            }
            if pos > 0 && records[order[pos - 1]].paper_id == rec.paper_id {
                return Err(CorpusError::DuplicatePaper {
                    record: rec_i.max(order[pos - 1]),
                    paper_id: rec.paper_id.clone(),
                });
            }
            paper_lookup.insert(rec.paper_id.clone(), PaperIdx(pos as u32));

            if rec.author_ids.is_empty() {
                return Err(CorpusError::NoAuthors {
                    record: rec_i,
                    paper_id: rec.paper_id.clone(),
                });
            }
            let mut seen = BTreeSet::new();
            for a in &rec.author_ids {
                if !seen.insert(a.as_str()) {
                    return Err(CorpusError::DuplicateAuthor {
                        record: rec_i,
                        paper_id: rec.paper_id.clone(),
                        author_id: a.clone(),
                    });
                }
            }
            if rec.reference_ids.contains(&rec.paper_id) {
                return Err(CorpusError::SelfReference {
                    record: rec_i,
                    paper_id: rec.paper_id.clone(),
                });
            }
            if let Some(emb) = &rec.embedding {
                if emb.is_empty() || emb.iter().any(|v| !v.is_finite()) {
                    return Err(CorpusError::BadEmbedding {
                        record: rec_i,
                        paper_id: rec.paper_id.clone(),
                    });
                }
                match embedding_dim {
                    None => embedding_dim = Some((emb.len(), rec_i)),
                    Some((dim, _)) if dim != emb.len() => {
                        return Err(CorpusError::EmbeddingDimension {
                            record: rec_i,
                            paper_id: rec.paper_id.clone(),
                            expected: dim,
                            found: emb.len(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }

        // Author universe, sorted by ID. Metadata: first record (in paper-ID
        // order) that supplies a field wins.
        let mut author_meta: BTreeMap<&str, (Option<&str>, Option<u32>)> = BTreeMap::new();
        for &rec_i in &order {
            let rec = &records[rec_i];
            for a in &rec.author_ids {
                author_meta.entry(a.as_str()).or_insert((None, None));
            }
            for meta in &rec.authors {
                let entry = author_meta.entry(meta.author_id.as_str()).or_insert((None, None));
                if entry.0.is_none() {
                    entry.0 = meta.display_name.as_deref();
                }
                if entry.1.is_none() {
                    entry.1 = meta.h_index;
                }
            }
        }
        // Metadata-only authors that never appear on a paper are dropped.
        let listed: BTreeSet<&str> = records
            .iter()
            .flat_map(|r| r.author_ids.iter().map(String::as_str))
            .collect();
        author_meta.retain(|id, _| listed.contains(id));

        let mut author_lookup = BTreeMap::new();
        let mut authors: Vec<Author> = Vec::with_capacity(author_meta.len());
        for (i, (id, (name, h))) in author_meta.iter().enumerate() {
            author_lookup.insert(id.to_string(), AuthorIdx(i as u32));
            authors.push(Author {
                id: id.to_string(),
                display_name: name.map(str::to_string).unwrap_or_else(|| id.to_string()),
                papers: Vec::new(),
                h_index: *h,
                citation_count: 0,
            });
        }

        let mut dangling_ref_count = 0;
        let mut papers = Vec::with_capacity(records.len());
        let mut records: Vec<Option<PaperRecord>> = records.into_iter().map(Some).collect();
        for (pos, &rec_i) in order.iter().enumerate() {
            let rec = records[rec_i].take().expect("each record visited once");
            let author_idx: Vec<AuthorIdx> = rec.author_ids.iter().map(|a| author_lookup[a]).collect();
            for &a in &author_idx {
                authors[a.get()].papers.push(PaperIdx(pos as u32));
            }
            let mut references = Vec::with_capacity(rec.reference_ids.len());
            for r in &rec.reference_ids {
                match paper_lookup.get(r) {
                    Some(&p) => references.push(p),
                    None => dangling_ref_count += 1,
                }
            }
            references.sort_unstable();
            references.dedup();
            papers.push(Paper {
                id: rec.paper_id,
                title: rec.title,
                abstract_text: rec.abstract_text,
                year: rec.year,
                pub_day: rec.pub_day,
                authors: author_idx,
                references,
                embedding: rec.embedding,
            });
        }

        let mut citing = alloc::vec![Vec::new(); papers.len()];
        for (q, paper) in papers.iter().enumerate() {
            for &p in &paper.references {
                citing[p.get()].push(PaperIdx(q as u32));
            }
        }
        for author in &mut authors {
            author.citation_count = author.papers.iter().map(|p| citing[p.get()].len() as u64).sum();
        }

        let mut recency: Vec<PaperIdx> = (0..papers.len() as u32).map(PaperIdx).collect();
        recency.sort_by(|a, b| papers[b.get()].pub_day.cmp(&papers[a.get()].pub_day).then(a.cmp(b)));

        Ok(CorpusIndex {
            papers,
            authors,
            paper_lookup,
            author_lookup,
            citing,
            recency,
            embedding_dim: embedding_dim.map(|(d, _)| d),
            dangling_ref_count,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn num_papers(&self) -> usize {
        self.papers.len()
    }

    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.embedding_dim
    }

    pub fn dangling_ref_count(&self) -> usize {
        self.dangling_ref_count
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn authors(&self) -> &[Author] {
        &self.authors
    }

    #[inline]
    pub fn paper(&self, p: PaperIdx) -> &Paper {
        &self.papers[p.get()]
    }

    #[inline]
    pub fn author(&self, a: AuthorIdx) -> &Author {
        &self.authors[a.get()]
    }

    pub fn paper_idx(&self, paper_id: &str) -> Option<PaperIdx> {
        self.paper_lookup.get(paper_id).copied()
    }

    pub fn author_idx(&self, author_id: &str) -> Option<AuthorIdx> {
        self.author_lookup.get(author_id).copied()
    }

    pub fn require_paper(&self, paper_id: &str) -> Result<PaperIdx, Error> {
        self.paper_idx(paper_id).ok_or_else(|| Error::UnknownPaper(paper_id.to_string()))
    }

    pub fn require_author(&self, author_id: &str) -> Result<AuthorIdx, Error> {
        self.author_idx(author_id).ok_or_else(|| Error::UnknownAuthor(author_id.to_string()))
    }

    /// Papers whose reference list contains `p`, sorted by index.
    #[inline]
    pub fn citing(&self, p: PaperIdx) -> &[PaperIdx] {
        &self.citing[p.get()]
    }

    /// String-keyed form of [`citing`](Self::citing).
    pub fn citing_papers(&self, paper_id: &str) -> Result<Vec<&str>, Error> {
        let p = self.require_paper(paper_id)?;
        Ok(self.citing(p).iter().map(|&q| self.paper(q).id.as_str()).collect())
    }

    /// All papers, newest first (ties by ascending ID).
    pub fn recency_order(&self) -> &[PaperIdx] {
        &self.recency
    }

    /// Papers published in `[now - window_days, now]`, newest first.
    pub fn published_within(&self, now_day: i64, window_days: i64) -> &[PaperIdx] {
        let oldest = now_day.saturating_sub(window_days);
        let start = self.recency.partition_point(|p| self.paper(*p).pub_day > now_day);
        let end = self.recency.partition_point(|p| self.paper(*p).pub_day >= oldest);
        &self.recency[start..end.max(start)]
    }

    /// Number of `author`'s papers that cite `cited`, not counting
    /// self-citations (zero whenever `author` wrote `cited`).
    pub fn citation_count_by(&self, author: AuthorIdx, cited: PaperIdx) -> u32 {
        if self.paper(cited).has_author(author) {
            return 0;
        }
        self.citing(cited)
            .iter()
            .filter(|&&q| self.paper(q).has_author(author))
            .count() as u32
    }

    /// String-keyed form of [`citation_count_by`](Self::citation_count_by).
    pub fn author_citation_count(&self, citing_author_id: &str, cited_paper_id: &str) -> Result<u32, Error> {
        let a = self.require_author(citing_author_id)?;
        let p = self.require_paper(cited_paper_id)?;
        Ok(self.citation_count_by(a, p))
    }

    /// Case-insensitive substring search over display names, most prolific
    /// authors first, then ascending ID. An empty query matches nothing.
    pub fn search_authors(&self, query: &str) -> Vec<AuthorIdx> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<AuthorIdx> = self
            .authors
            .iter()
            .enumerate()
            .filter(|(_, a)| a.display_name.to_lowercase().contains(&needle))
            .map(|(i, _)| AuthorIdx(i as u32))
            .collect();
        hits.sort_by(|a, b| {
            self.author(*b)
                .papers
                .len()
                .cmp(&self.author(*a).papers.len())
                .then(a.cmp(b))
        });
        hits
    }
}
