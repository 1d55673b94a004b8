//! Synthetic planted-community corpora and scripted agents.

pub mod agent;

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike};
use committee_core::{AuthorRecord, PaperRecord};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agent::{run_agent, BatchMetrics, Policy, SimMetrics};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub n_communities: usize,
    pub authors_per_community: usize,
    pub papers_per_author: usize,
    /// Chance that each of the three coauthor slots on a paper is filled.
    pub intra_coauthor_prob: f64,
    pub intra_cite_prob: f64,
    pub cross_cite_prob: f64,
    /// Citation attempts per paper, for each of the intra and cross draws.
    pub cite_attempts: usize,
    pub vocab_per_community: usize,
    pub shared_vocab: usize,
    /// Share of words drawn from the paper's own community vocabulary.
    pub topic_word_share: f64,
    pub title_words: usize,
    pub abstract_words: usize,
    /// 0 disables embeddings.
    pub embedding_dim: usize,
    pub embedding_noise: f64,
    pub start_day: i64,
    pub span_days: i64,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n_communities: 5,
            authors_per_community: 20,
            papers_per_author: 20,
            intra_coauthor_prob: 0.5,
            intra_cite_prob: 0.5,
            cross_cite_prob: 0.05,
            cite_attempts: 8,
            vocab_per_community: 60,
            shared_vocab: 200,
            topic_word_share: 0.6,
            title_words: 6,
            abstract_words: 40,
            embedding_dim: 16,
            embedding_noise: 0.6,
            start_day: 17_000,
            span_days: 2_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{0} must be in [0, 1]")]
    Probability(&'static str),
    #[error("{0} must be positive")]
    Count(&'static str),
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, p) in [
            ("intra_coauthor_prob", self.intra_coauthor_prob),
            ("intra_cite_prob", self.intra_cite_prob),
            ("cross_cite_prob", self.cross_cite_prob),
            ("topic_word_share", self.topic_word_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Probability(name));
            }
        }
        for (name, n) in [
            ("n_communities", self.n_communities),
            ("authors_per_community", self.authors_per_community),
            ("papers_per_author", self.papers_per_author),
            ("vocab_per_community", self.vocab_per_community),
            ("title_words", self.title_words),
        ] {
            if n == 0 {
                return Err(SimError::Count(name));
            }
        }
        if self.span_days <= 0 {
            return Err(SimError::Count("span_days"));
        }
        if self.embedding_noise.is_nan() || self.embedding_noise < 0.0 {
            return Err(SimError::Probability("embedding_noise"));
        }
        Ok(())
    }

    pub fn num_papers(&self) -> usize {
        self.n_communities * self.authors_per_community * self.papers_per_author
    }
}

/// Generated records plus the planted labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub records: Vec<PaperRecord>,
    pub author_community: BTreeMap<String, usize>,
    pub paper_community: BTreeMap<String, usize>,
}

impl SyntheticCorpus {
    pub fn papers_of(&self, community: usize) -> Vec<&str> {
        self.paper_community
            .iter()
            .filter(|(_, &c)| c == community)
            .map(|(p, _)| p.as_str())
            .collect()
    }
}

pub fn author_id(community: usize, i: usize) -> String {
    format!("c{community}-a{i:03}")
}

fn paper_id(community: usize, lead: usize, j: usize) -> String {
    format!("c{community}-p{lead:03}-{j:03}")
}

fn word(community: Option<usize>, k: usize) -> String {
    match community {
        Some(c) => format!("topic{c}x{k}"),
        None => format!("common{k}"),
    }
}

/// Calendar year of a day count since the Unix epoch.
pub fn year_of(day: i64) -> i32 {
    DateTime::from_timestamp(day * 86_400, 0).map_or(1970, |d| d.year())
}

/// Every author leads `papers_per_author` papers; coauthors and citations
/// are drawn from the lead's community except for the cross-community
/// citation draws.
pub fn generate_corpus(params: &SimParams) -> Result<SyntheticCorpus, SimError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let nc = params.n_communities;
    let na = params.authors_per_community;

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, params.embedding_noise.max(f64::MIN_POSITIVE)).expect("finite noise");
    let centers: Vec<Vec<f64>> = (0..nc)
        .map(|_| {
            let v: Vec<f64> = (0..params.embedding_dim).map(|_| unit.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();

    let mut records = Vec::with_capacity(params.num_papers());
    let mut paper_community = BTreeMap::new();
    let mut author_community = BTreeMap::new();
    let mut by_community: Vec<Vec<usize>> = vec![Vec::new(); nc];

    for c in 0..nc {
        for lead in 0..na {
            author_community.insert(author_id(c, lead), c);
            for j in 0..params.papers_per_author {
                let mut authors = vec![lead];
                for _ in 0..3 {
                    if na > authors.len() && rng.random_bool(params.intra_coauthor_prob) {
                        let pick = loop {
                            let a = rng.random_range(0..na);
                            if !authors.contains(&a) {
                                break a;
                            }
                        };
                        authors.push(pick);
                    }
                }
                let text = |n: usize, rng: &mut ChaCha8Rng| -> String {
                    (0..n)
                        .map(|_| {
                            if params.shared_vocab == 0 || rng.random_bool(params.topic_word_share) {
                                word(Some(c), rng.random_range(0..params.vocab_per_community))
                            } else {
                                word(None, rng.random_range(0..params.shared_vocab))
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let title = text(params.title_words, &mut rng);
                let abstract_text = text(params.abstract_words, &mut rng);
                let pub_day = params.start_day + rng.random_range(0..params.span_days);
                let embedding = (params.embedding_dim > 0).then(|| {
                    centers[c]
                        .iter()
                        .map(|x| (x + noise.sample(&mut rng) / (params.embedding_dim as f64).sqrt()) as f32)
                        .collect()
                });
                let id = paper_id(c, lead, j);
                paper_community.insert(id.clone(), c);
                by_community[c].push(records.len());
                let author_ids: Vec<String> = authors.iter().map(|&a| author_id(c, a)).collect();
                records.push(PaperRecord {
                    paper_id: id,
                    title,
                    abstract_text,
                    year: year_of(pub_day),
                    pub_day,
                    authors: author_ids
                        .iter()
                        .map(|a| AuthorRecord {
                            author_id: a.clone(),
                            display_name: Some(format!("Author {a}")),
                            h_index: None,
                        })
                        .collect(),
                    author_ids,
                    reference_ids: Vec::new(),
                    embedding,
                });
            }
        }
    }

    // Citations are drawn once every paper exists.
    let other: Vec<Vec<usize>> = (0..nc)
        .map(|c| (0..nc).filter(|&d| d != c).flat_map(|d| by_community[d].iter().copied()).collect())
        .collect();
    for c in 0..nc {
        for &i in &by_community[c] {
            let mut refs = Vec::new();
            for _ in 0..params.cite_attempts {
                if rng.random_bool(params.intra_cite_prob) {
                    let &r = by_community[c].choose(&mut rng).expect("non-empty community");
                    if r != i {
                        refs.push(r);
                    }
                }
            }
            for _ in 0..params.cite_attempts {
                if rng.random_bool(params.cross_cite_prob) {
                    if let Some(&r) = other[c].choose(&mut rng) {
                        refs.push(r);
                    }
                }
            }
            refs.sort_unstable();
            refs.dedup();
            records[i].reference_ids = refs.iter().map(|&r| records[r].paper_id.clone()).collect();
        }
    }

    Ok(SyntheticCorpus {
        records,
        author_community,
        paper_community,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimParams {
        SimParams {
            n_communities: 3,
            authors_per_community: 5,
            papers_per_author: 4,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(generate_corpus(&small()).unwrap(), generate_corpus(&small()).unwrap());
        let other = SimParams { seed: 10, ..small() };
        assert_ne!(generate_corpus(&small()).unwrap(), generate_corpus(&other).unwrap());
    }

    #[test]
    fn no_cross_edges_without_cross_prob() {
        let p = SimParams {
            cross_cite_prob: 0.0,
            ..small()
        };
        let s = generate_corpus(&p).unwrap();
        let mut edges = 0;
        for r in &s.records {
            let c = s.paper_community[&r.paper_id];
            for q in &r.reference_ids {
                edges += 1;
                assert_eq!(s.paper_community[q], c);
            }
            assert!(r.author_ids.iter().all(|a| s.author_community[a] == c));
        }
        assert!(edges > 0);
    }

    #[test]
    fn counts_and_validity() {
        let s = generate_corpus(&small()).unwrap();
        assert_eq!(s.records.len(), 60);
        assert_eq!(s.author_community.len(), 15);
        committee_core::CorpusIndex::from_records(s.records).unwrap();
        assert_eq!(
            generate_corpus(&SimParams { intra_cite_prob: 1.5, ..small() }),
            Err(SimError::Probability("intra_cite_prob"))
        );
        assert_eq!(
            generate_corpus(&SimParams { n_communities: 0, ..small() }),
            Err(SimError::Count("n_communities"))
        );
    }

    #[test]
    fn year_from_day() {
        assert_eq!(year_of(0), 1970);
        assert_eq!(year_of(18_262), 2020);
        assert_eq!(year_of(18_261), 2019);
    }
}
