//! Paper relevance model: the mean of two linear max-margin classifiers, one
//! over tf-idf text features and one over document embeddings.

pub mod svm;
pub mod text;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, PaperIdx};
use crate::error::Error;
use crate::feedback::{FeedbackSet, Label};
use svm::SvmParams;
pub use text::{EmbeddingFeatures, SparseVec, TextFeatures};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    /// Hinge-loss weight `C`.
    pub regularization: f64,
    pub epochs: usize,
    /// Pseudo-negatives sampled when the folder has no downvotes yet.
    pub pseudo_negatives: usize,
    pub bias_feature: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            regularization: 1.0,
            epochs: 200,
            pseudo_negatives: 25,
            bias_feature: 1.0,
        }
    }
}

impl ScorerConfig {
    fn svm(&self) -> SvmParams {
        SvmParams {
            c: self.regularization,
            epochs: self.epochs,
            bias_feature: self.bias_feature,
        }
    }
}

/// Text and embedding features for every paper, computed once per corpus.
#[derive(Clone, Debug, Default)]
pub struct Features {
    pub text: TextFeatures,
    pub embeddings: EmbeddingFeatures,
}

impl Features {
    pub fn build(corpus: &CorpusIndex) -> Self {
        Features {
            text: TextFeatures::build(corpus),
            embeddings: EmbeddingFeatures::build(corpus),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearComponent {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Raw (unclamped) decision values of each component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentScores {
    pub text: f64,
    pub embedding: Option<f64>,
}

impl ComponentScores {
    pub fn ensemble(self) -> f64 {
        ensemble(self.text, self.embedding)
    }
}

/// Clamps each component to `[-1, 1]` and averages the available ones.
pub fn ensemble(text: f64, embedding: Option<f64>) -> f64 {
    let t = clamp_unit(text);
    match embedding {
        Some(e) => (t + clamp_unit(e)) / 2.0,
        None => t,
    }
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

/// User judgments replace model output: saved papers score `+1`, downvoted
/// ones `-1`.
#[inline]
pub fn with_feedback(model_score: f64, label: Option<Label>) -> f64 {
    match label {
        Some(l) => l.value(),
        None => model_score,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelevanceModel {
    pub text: LinearComponent,
    pub embedding: Option<LinearComponent>,
    pub train_seed: u64,
    pub positives: usize,
    pub negatives: usize,
    pub pseudo_negatives: usize,
}

impl RelevanceModel {
    pub fn train(
        corpus: &CorpusIndex,
        features: &Features,
        feedback: &FeedbackSet,
        seed: u64,
        config: &ScorerConfig,
    ) -> Result<Self, Error> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let positives = feedback.positives();
        if positives.is_empty() {
            return Err(Error::NoPositives);
        }
        let mut negatives = feedback.negatives();
        let mut pseudo = 0;
        if negatives.is_empty() {
            negatives = sample_pseudo_negatives(corpus.num_papers(), &positives, config.pseudo_negatives, seed);
            pseudo = negatives.len();
        }

        let examples: Vec<(PaperIdx, f64)> = positives
            .iter()
            .map(|&p| (p, 1.0))
            .chain(negatives.iter().map(|&p| (p, -1.0)))
            .collect();

        let params = config.svm();
        let text = fit_text(features, &examples, &params);
        let embedding = fit_embedding(features, &examples, &params);

        Ok(RelevanceModel {
            text,
            embedding,
            train_seed: seed,
            positives: positives.len(),
            negatives: if pseudo > 0 { 0 } else { negatives.len() },
            pseudo_negatives: pseudo,
        })
    }

    pub fn decisions(&self, features: &Features, p: PaperIdx) -> ComponentScores {
        let text = features.text.row(p).dot_dense(&self.text.weights) + self.text.bias;
        let embedding = match (&self.embedding, features.embeddings.row(p)) {
            (Some(m), Some(row)) => Some(dense_dot(&m.weights, row) + m.bias),
            _ => None,
        };
        ComponentScores { text, embedding }
    }

    pub fn score(&self, features: &Features, p: PaperIdx) -> f64 {
        self.decisions(features, p).ensemble()
    }

    /// Scores text (and optionally an embedding) that is not in the corpus.
    pub fn score_text(&self, features: &Features, title: &str, abstract_text: &str, embedding: Option<&[f32]>) -> f64 {
        let row = features.text.vectorize(title, abstract_text);
        let text = row.dot_dense(&self.text.weights) + self.text.bias;
        let emb = match (&self.embedding, embedding) {
            (Some(m), Some(e)) if e.len() == m.weights.len() => {
                Some(dense_dot(&m.weights, &text::normalize(e)) + m.bias)
            }
            _ => None,
        };
        ensemble(text, emb)
    }

    pub fn score_with_feedback(&self, features: &Features, p: PaperIdx, feedback: &FeedbackSet) -> f64 {
        match feedback.label(p) {
            Some(l) => l.value(),
            None => self.score(features, p),
        }
    }

    pub fn score_corpus(&self, features: &Features) -> ScoreTable {
        let n = features.text.num_rows();
        ScoreTable((0..n as u32).map(|i| self.score(features, PaperIdx(i))).collect())
    }
}

fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sample_pseudo_negatives(n: usize, positives: &[PaperIdx], k: usize, seed: u64) -> Vec<PaperIdx> {
    let pool: Vec<PaperIdx> = (0..n as u32)
        .map(PaperIdx)
        .filter(|p| positives.binary_search(p).is_err())
        .collect();
    let k = k.min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<PaperIdx> = rand::seq::index::sample(&mut rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

fn fit_text(features: &Features, examples: &[(PaperIdx, f64)], params: &SvmParams) -> LinearComponent {
    let rows: Vec<&SparseVec> = examples.iter().map(|(p, _)| features.text.row(*p)).collect();
    let labels: Vec<f64> = examples.iter().map(|(_, y)| *y).collect();
    let k = svm::gram(rows.len(), params.bias_feature, |i, j| rows[i].dot(rows[j]));
    let alpha = svm::fit(&k, &labels, params);
    let mut weights = alloc::vec![0.0; features.text.vocab_len()];
    for (row, a) in rows.iter().zip(&alpha) {
        row.add_scaled_to(&mut weights, *a);
    }
    LinearComponent {
        weights,
        bias: params.bias_feature * alpha.iter().sum::<f64>(),
    }
}

fn fit_embedding(features: &Features, examples: &[(PaperIdx, f64)], params: &SvmParams) -> Option<LinearComponent> {
    let dim = features.embeddings.dim();
    if dim == 0 {
        return None;
    }
    let (rows, labels): (Vec<&[f64]>, Vec<f64>) = examples
        .iter()
        .filter_map(|(p, y)| features.embeddings.row(*p).map(|r| (r, *y)))
        .unzip();
    let has_pos = labels.iter().any(|&y| y > 0.0);
    let has_neg = labels.iter().any(|&y| y < 0.0);
    if !has_pos || !has_neg {
        return None;
    }
    let k = svm::gram(rows.len(), params.bias_feature, |i, j| dense_dot(rows[i], rows[j]));
    let alpha = svm::fit(&k, &labels, params);
    let mut weights = alloc::vec![0.0; dim];
    for (row, a) in rows.iter().zip(&alpha) {
        for (w, x) in weights.iter_mut().zip(row.iter()) {
            *w += a * x;
        }
    }
    Some(LinearComponent {
        weights,
        bias: params.bias_feature * alpha.iter().sum::<f64>(),
    })
}

/// Model score of every paper, indexed by [`PaperIdx`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable(pub Vec<f64>);

impl ScoreTable {
    #[inline]
    pub fn get(&self, p: PaperIdx) -> f64 {
        self.0[p.get()]
    }

    pub fn view<'a>(&'a self, feedback: &'a FeedbackSet) -> Relevance<'a> {
        Relevance::new(&self.0, feedback)
    }
}

/// Model scores with user feedback applied on top.
#[derive(Clone, Copy, Debug)]
pub struct Relevance<'a> {
    scores: &'a [f64],
    feedback: &'a FeedbackSet,
}

impl<'a> Relevance<'a> {
    pub fn new(scores: &'a [f64], feedback: &'a FeedbackSet) -> Self {
        Relevance { scores, feedback }
    }

    #[inline]
    pub fn model_score(&self, p: PaperIdx) -> f64 {
        self.scores[p.get()]
    }

    #[inline]
    pub fn score(&self, p: PaperIdx) -> f64 {
        with_feedback(self.scores[p.get()], self.feedback.label(p))
    }

    pub fn feedback(&self) -> &'a FeedbackSet {
        self.feedback
    }
}
