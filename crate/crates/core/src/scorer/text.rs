use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{CorpusIndex, PaperIdx};

/// Lowercases, splits on anything that is not alphanumeric and drops
/// single-character tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .map(|t| t.to_lowercase())
        .collect()
}

fn push_ngrams(text: &str, out: &mut Vec<String>) {
    let tokens = tokenize(text);
    for pair in tokens.windows(2) {
        let mut bigram = String::with_capacity(pair[0].len() + pair[1].len() + 1);
        bigram.push_str(&pair[0]);
        bigram.push(' ');
        bigram.push_str(&pair[1]);
        out.push(bigram);
    }
    out.extend(tokens);
}

/// Unigrams and bigrams of the title and abstract. Bigrams never span the
/// title/abstract boundary.
pub fn terms(title: &str, abstract_text: &str) -> Vec<String> {
    let mut out = Vec::new();
    push_ngrams(title, &mut out);
    push_ngrams(abstract_text, &mut out);
    out
}

/// Sparse vector with strictly increasing indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense[i as usize] * v)
            .sum()
    }

    pub fn add_scaled_to(&self, dense: &mut [f64], scale: f64) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            dense[i as usize] += scale * v;
        }
    }
}

/// Corpus-wide vocabulary, smoothed idf table and the L2-normalised tf-idf
/// row of every paper.
#[derive(Clone, Debug, Default)]
pub struct TextFeatures {
    vocab: HashMap<String, u32>,
    idf: Vec<f64>,
    rows: Vec<SparseVec>,
}

impl TextFeatures {
    pub fn build(corpus: &CorpusIndex) -> Self {
        let mut vocab: HashMap<String, u32> = HashMap::new();
        let mut doc_freq: Vec<u32> = Vec::new();
        let mut counts: Vec<Vec<(u32, u32)>> = Vec::with_capacity(corpus.num_papers());
        let mut local: HashMap<u32, u32> = HashMap::new();
        // Term IDs follow first appearance in paper-ID order, which keeps
        // them independent of hash seeds.
        for paper in corpus.papers() {
            local.clear();
            for term in terms(&paper.title, &paper.abstract_text) {
                let next = vocab.len() as u32;
                let id = *vocab.entry(term).or_insert(next);
                if id == next {
                    doc_freq.push(0);
                }
                *local.entry(id).or_insert(0) += 1;
            }
            let mut row: Vec<(u32, u32)> = local.iter().map(|(&k, &v)| (k, v)).collect();
            row.sort_unstable();
            for &(id, _) in &row {
                doc_freq[id as usize] += 1;
            }
            counts.push(row);
        }
        let n = corpus.num_papers() as f64;
        let idf: Vec<f64> = doc_freq
            .iter()
            .map(|&df| libm::log((1.0 + n) / (1.0 + df as f64)) + 1.0)
            .collect();
        let rows = counts
            .into_iter()
            .map(|row| weigh(row.into_iter(), &idf))
            .collect();
        TextFeatures { vocab, idf, rows }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vocab_len(&self) -> usize {
        self.idf.len()
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.vocab.get(term).copied()
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    #[inline]
    pub fn row(&self, p: PaperIdx) -> &SparseVec {
        &self.rows[p.get()]
    }

    /// Vectorises text outside the corpus. Terms missing from the
    /// vocabulary are ignored.
    pub fn vectorize(&self, title: &str, abstract_text: &str) -> SparseVec {
        let mut local: HashMap<u32, u32> = HashMap::new();
        for term in terms(title, abstract_text) {
            if let Some(id) = self.term_id(&term) {
                *local.entry(id).or_insert(0) += 1;
            }
        }
        let mut row: Vec<(u32, u32)> = local.into_iter().collect();
        row.sort_unstable();
        weigh(row.into_iter(), &self.idf)
    }
}

fn weigh(row: impl Iterator<Item = (u32, u32)>, idf: &[f64]) -> SparseVec {
    let (indices, mut values): (Vec<u32>, Vec<f64>) =
        row.map(|(id, tf)| (id, tf as f64 * idf[id as usize])).unzip();
    let norm = libm::sqrt(values.iter().map(|v| v * v).sum::<f64>());
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    SparseVec { indices, values }
}

/// L2-normalised document embeddings, `None` for papers without one.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingFeatures {
    dim: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl EmbeddingFeatures {
    pub fn build(corpus: &CorpusIndex) -> Self {
        let rows = corpus
            .papers()
            .iter()
            .map(|p| p.embedding.as_deref().map(normalize))
            .collect();
        EmbeddingFeatures {
            dim: corpus.embedding_dim().unwrap_or(0),
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, p: PaperIdx) -> Option<&[f64]> {
        self.rows[p.get()].as_deref()
    }
}

pub(crate) fn normalize(v: &[f32]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|&x| x as f64).collect();
    let norm = libm::sqrt(out.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}
