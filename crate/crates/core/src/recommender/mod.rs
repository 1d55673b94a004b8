//! Author-sourcing strategies and batch generation.

pub mod strategies;
pub mod voting;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIdx, CorpusIndex};
use crate::explainer::{build_card, order_cards, AuthorCard};
use crate::scorer::Relevance;
pub use strategies::{
    get_relevant_papers, strategy_citation, strategy_coauthor, strategy_library, strategy_recent,
};
pub use voting::{rank_authors, sort_sample, vote_author, vote_multi};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    LibraryExtracted,
    RecentRelevant,
    CoauthorExpansion,
    CitationExpansion,
}

impl Strategy {
    /// Interleave order within a batch.
    pub const ALL: [Strategy; 4] = [
        Strategy::LibraryExtracted,
        Strategy::RecentRelevant,
        Strategy::CoauthorExpansion,
        Strategy::CitationExpansion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::LibraryExtracted => "library_extracted",
            Strategy::RecentRelevant => "recent_relevant",
            Strategy::CoauthorExpansion => "coauthor_expansion",
            Strategy::CitationExpansion => "citation_expansion",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    pub recency_window_days: i64,
    /// Recent papers allowed to vote.
    pub pool_size: usize,
    /// Relevant committee papers sampled for the expansion strategies.
    pub relevant_sample: usize,
    /// References kept after author-level voting.
    pub reference_sample: usize,
    pub batch_size: usize,
    pub per_strategy: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            recency_window_days: 180,
            pool_size: 100,
            relevant_sample: 100,
            reference_sample: 100,
            batch_size: 8,
            per_strategy: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub author: AuthorIdx,
    pub votes: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedAuthorList {
    pub strategy: Strategy,
    pub entries: Vec<RankedEntry>,
    /// Next unserved entry.
    pub cursor: usize,
}

impl RankedAuthorList {
    pub fn new(strategy: Strategy, ranked: Vec<(AuthorIdx, u32)>) -> Self {
        RankedAuthorList {
            strategy,
            entries: ranked
                .into_iter()
                .map(|(author, votes)| RankedEntry { author, votes })
                .collect(),
            cursor: 0,
        }
    }

    pub fn empty(strategy: Strategy) -> Self {
        RankedAuthorList { strategy, entries: Vec::new(), cursor: 0 }
    }

    pub fn authors(&self) -> impl Iterator<Item = AuthorIdx> + '_ {
        self.entries.iter().map(|e| e.author)
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.entries.len()
    }
}

/// Everything the strategies read.
#[derive(Clone, Copy)]
pub struct BatchInputs<'a> {
    pub corpus: &'a CorpusIndex,
    pub relevance: Relevance<'a>,
    pub committee: &'a [AuthorIdx],
    pub blocked: &'a BTreeSet<AuthorIdx>,
    pub user: Option<AuthorIdx>,
    pub now_day: i64,
    pub params: &'a StrategyParams,
    pub default_visible: usize,
}

impl BatchInputs<'_> {
    /// Committee members, blocked authors and the user never get a card.
    pub fn is_excluded(&self, a: AuthorIdx) -> bool {
        self.committee.contains(&a) || self.blocked.contains(&a) || self.user == Some(a)
    }

    pub fn build_lists(&self) -> Vec<RankedAuthorList> {
        let p = self.params;
        let saved = self.relevance.feedback().positives();
        Strategy::ALL
            .iter()
            .map(|s| match s {
                Strategy::LibraryExtracted => strategy_library(self.corpus, &saved),
                Strategy::RecentRelevant => strategy_recent(
                    self.corpus,
                    &self.relevance,
                    self.now_day,
                    p.recency_window_days,
                    p.pool_size,
                ),
                Strategy::CoauthorExpansion => {
                    strategy_coauthor(self.corpus, self.committee, self.user, &self.relevance, p.relevant_sample)
                }
                Strategy::CitationExpansion => strategy_citation(
                    self.corpus,
                    self.committee,
                    self.user,
                    &self.relevance,
                    p.relevant_sample,
                    p.reference_sample,
                ),
            })
            .collect()
    }
}

/// Ranked lists with cursors plus the authors served since the lists were
/// last rebuilt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchState {
    pub lists: Vec<RankedAuthorList>,
    pub served: BTreeSet<AuthorIdx>,
    pub batch_counter: u64,
}

impl Default for BatchState {
    fn default() -> Self {
        BatchState {
            lists: Strategy::ALL.iter().map(|&s| RankedAuthorList::empty(s)).collect(),
            served: BTreeSet::new(),
            batch_counter: 0,
        }
    }
}

impl BatchState {
    pub fn build(inputs: &BatchInputs<'_>) -> Self {
        BatchState {
            lists: inputs.build_lists(),
            served: BTreeSet::new(),
            batch_counter: 0,
        }
    }

    /// Replenishes every list from the current folder state and resets the
    /// cursors to the top.
    pub fn apply_feedback(&mut self, inputs: &BatchInputs<'_>) {
        self.lists = inputs.build_lists();
        self.served.clear();
    }

    pub fn list(&self, strategy: Strategy) -> &RankedAuthorList {
        &self.lists[strategy as usize]
    }

    /// Takes up to `per_strategy` eligible authors from each list, round
    /// robin in [`Strategy::ALL`] order, moving cursors past everything
    /// examined.
    pub fn select(&mut self, inputs: &BatchInputs<'_>) -> Vec<(AuthorIdx, Strategy)> {
        let batch_size = inputs.params.batch_size;
        let mut picked: Vec<(AuthorIdx, Strategy)> = Vec::with_capacity(batch_size);
        for _ in 0..inputs.params.per_strategy {
            for list in self.lists.iter_mut() {
                if picked.len() >= batch_size {
                    break;
                }
                while let Some(entry) = list.entries.get(list.cursor) {
                    list.cursor += 1;
                    let a = entry.author;
                    if inputs.is_excluded(a) || self.served.contains(&a) || picked.iter().any(|(x, _)| *x == a) {
                        continue;
                    }
                    picked.push((a, list.strategy));
                    break;
                }
            }
        }
        self.served.extend(picked.iter().map(|(a, _)| *a));
        self.batch_counter += 1;
        picked
    }

    /// Next batch of cards in presentation order. Empty once every list is
    /// exhausted.
    pub fn generate_batch(&mut self, inputs: &BatchInputs<'_>) -> Vec<AuthorCard> {
        let picked = self.select(inputs);
        let mut cards: Vec<AuthorCard> = picked
            .into_iter()
            .map(|(a, s)| {
                build_card(
                    inputs.corpus,
                    a,
                    Some(s),
                    inputs.committee,
                    &inputs.relevance,
                    inputs.default_visible,
                )
            })
            .collect();
        order_cards(&mut cards);
        cards
    }
}
