//! Scripted users that judge cards by the planted community labels.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use committee_core::{Action, AuthorCard, Engine, Error, FeedbackEvent, Folder};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The community every agent is looking for.
pub const TARGET: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    /// Seeds from the target community, saves its authors and papers,
    /// blocks and downvotes everything else.
    #[serde(rename = "greedy-community-0")]
    GreedyCommunity0,
    /// Seeds from uniformly random papers and judges by coin flip.
    #[serde(rename = "random")]
    Random,
    /// Like greedy, but only saves target authors with no explanation tag
    /// and leaves already-connected ones alone.
    #[serde(rename = "novelty-seeking")]
    NoveltySeeking,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::GreedyCommunity0, Policy::Random, Policy::NoveltySeeking];

    pub fn name(self) -> &'static str {
        match self {
            Policy::GreedyCommunity0 => "greedy-community-0",
            Policy::Random => "random",
            Policy::NoveltySeeking => "novelty-seeking",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub policy: Policy,
    /// Feedback rounds after the first batch.
    pub steps: usize,
    pub seed_papers: usize,
    /// Unjudged publications judged per card.
    pub papers_per_card: usize,
    pub seed: u64,
    pub now_day: i64,
}

impl AgentParams {
    pub fn new(policy: Policy, steps: usize, seed: u64, now_day: i64) -> Self {
        AgentParams {
            policy,
            steps,
            seed_papers: 5,
            papers_per_card: 2,
            seed,
            now_day,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub policy: Policy,
    pub run_seed: u64,
    pub batch: usize,
    pub cards: usize,
    /// Share of cards whose author belongs to the target community.
    pub community_hit_fraction: f64,
    pub saved_authors: usize,
    /// Share of cards with at least one explanation tag.
    pub familiar_fraction: f64,
    /// Saved papers over all judged papers, seeds included.
    pub saved_share: f64,
    pub mean_saved_model_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub batches: Vec<BatchMetrics>,
}

impl SimMetrics {
    pub fn hit_fraction(&self, batch: usize) -> Option<f64> {
        self.batches.get(batch).map(|b| b.community_hit_fraction)
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        write_csv(w, &self.batches)
    }
}

pub fn write_csv<W: io::Write>(w: W, rows: &[BatchMetrics]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

fn fraction(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn measure(
    p: &AgentParams,
    batch: usize,
    folder: &Folder,
    cards: &[AuthorCard],
    authors: &BTreeMap<String, usize>,
) -> BatchMetrics {
    let fb = folder.feedback();
    let saved = fb.positives();
    let downvoted = fb.negatives().len();
    let scores = folder.scores();
    BatchMetrics {
        policy: p.policy,
        run_seed: p.seed,
        batch,
        cards: cards.len(),
        community_hit_fraction: fraction(
            cards.iter().filter(|c| authors.get(&c.author_id) == Some(&TARGET)).count(),
            cards.len(),
        ),
        saved_authors: folder.committee().len(),
        familiar_fraction: fraction(cards.iter().filter(|c| !c.tags.is_empty()).count(), cards.len()),
        saved_share: fraction(saved.len(), saved.len() + downvoted),
        mean_saved_model_score: if saved.is_empty() {
            0.0
        } else {
            saved.iter().map(|&q| scores.get(q)).sum::<f64>() / saved.len() as f64
        },
    }
}

/// Runs one agent: a first batch, then `steps` rounds of judging the last
/// batch and loading the next. Metrics hold `steps + 1` batches.
pub fn run_agent(
    engine: &Engine,
    author_community: &BTreeMap<String, usize>,
    paper_community: &BTreeMap<String, usize>,
    p: &AgentParams,
) -> Result<SimMetrics, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pool: Vec<&str> = match p.policy {
        Policy::Random => engine.corpus.papers().iter().map(|x| x.id.as_str()).collect(),
        _ => paper_community
            .iter()
            .filter(|(_, &c)| c == TARGET)
            .map(|(id, _)| id.as_str())
            .collect(),
    };
    let k = p.seed_papers.min(pool.len()).max(1);
    let mut seeds: Vec<&str> = sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    seeds.sort_unstable();

    let mut ts = 0u64;
    let (mut folder, _) = Folder::create(engine, "sim", "target community", &seeds, None, p.seed, ts, p.now_day)?;
    let mut cards = folder.load_batch(engine, ts)?;
    let mut out = vec![measure(p, 0, &folder, &cards, author_community)];

    let is_target = |id: &str, map: &BTreeMap<String, usize>| map.get(id) == Some(&TARGET);
    for step in 1..=p.steps {
        let mut events = Vec::new();
        for card in &cards {
            let target = is_target(&card.author_id, author_community);
            let (author_action, judge_papers) = match p.policy {
                Policy::GreedyCommunity0 => (Some(if target { Action::SaveAuthor } else { Action::BlockAuthor }), true),
                Policy::Random => (
                    Some(if rng.random_bool(0.5) { Action::SaveAuthor } else { Action::BlockAuthor }),
                    true,
                ),
                Policy::NoveltySeeking => match (target, card.tags.is_empty()) {
                    (true, true) => (Some(Action::SaveAuthor), true),
                    (true, false) => (None, false),
                    (false, _) => (Some(Action::BlockAuthor), true),
                },
            };
            if judge_papers {
                for paper in card.publications.ranked.iter().filter(|x| x.label.is_none()).take(p.papers_per_card) {
                    let save = match p.policy {
                        Policy::Random => rng.random_bool(0.5),
                        _ => is_target(&paper.paper_id, paper_community),
                    };
                    let action = if save { Action::SavePaper } else { Action::DownvotePaper };
                    events.push((action, paper.paper_id.clone()));
                }
            }
            if let Some(a) = author_action {
                events.push((a, card.author_id.clone()));
            }
        }
        for (action, subject_id) in events {
            ts += 1;
            let ev = FeedbackEvent {
                action,
                subject_id,
                timestamp: ts,
            };
            match folder.record_feedback(engine, &ev, p.now_day) {
                Ok(()) | Err(Error::LastPositive) => {}
                Err(e) => return Err(e),
            }
        }
        ts += 1;
        cards = folder.load_batch(engine, ts)?;
        out.push(measure(p, step, &folder, &cards, author_community));
    }
    Ok(SimMetrics { batches: out })
}
