use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::PaperIdx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Saved,
    Downvoted,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Saved => 1.0,
            Label::Downvoted => -1.0,
        }
    }
}

/// An explicit judgment. `seq` orders interactions even when timestamps
/// collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub label: Label,
    pub timestamp: u64,
    pub seq: u64,
}

/// Current paper labels for a folder.
///
/// Seeds count as saved unless an explicit judgment overrides them; the
/// latest judgment on a paper always wins.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeedbackSet {
    seeds: BTreeSet<PaperIdx>,
    seed_timestamp: u64,
    judgments: BTreeMap<PaperIdx, Judgment>,
    next_seq: u64,
}

impl FeedbackSet {
    pub fn with_seeds(seeds: impl IntoIterator<Item = PaperIdx>, timestamp: u64) -> Self {
        FeedbackSet {
            seeds: seeds.into_iter().collect(),
            seed_timestamp: timestamp,
            judgments: BTreeMap::new(),
            next_seq: 0,
        }
    }

    /// Rebuilds a set from persisted parts.
    pub fn from_parts(
        seeds: BTreeSet<PaperIdx>,
        seed_timestamp: u64,
        judgments: BTreeMap<PaperIdx, Judgment>,
    ) -> Self {
        let next_seq = judgments.values().map(|j| j.seq + 1).max().unwrap_or(0);
        FeedbackSet {
            seeds,
            seed_timestamp,
            judgments,
            next_seq,
        }
    }

    pub fn seeds(&self) -> &BTreeSet<PaperIdx> {
        &self.seeds
    }

    pub fn seed_timestamp(&self) -> u64 {
        self.seed_timestamp
    }

    pub fn judgments(&self) -> &BTreeMap<PaperIdx, Judgment> {
        &self.judgments
    }

    pub fn label(&self, p: PaperIdx) -> Option<Label> {
        match self.judgments.get(&p) {
            Some(j) => Some(j.label),
            None if self.seeds.contains(&p) => Some(Label::Saved),
            None => None,
        }
    }

    pub fn is_judged(&self, p: PaperIdx) -> bool {
        self.label(p).is_some()
    }

    pub fn set(&mut self, p: PaperIdx, label: Label, timestamp: u64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.judgments.insert(p, Judgment { label, timestamp, seq });
    }

    /// Drops an explicit judgment. A seed falls back to saved.
    pub fn clear(&mut self, p: PaperIdx) -> bool {
        self.judgments.remove(&p).is_some()
    }

    /// Papers currently labelled `label`, ascending.
    pub fn with_label(&self, label: Label) -> Vec<PaperIdx> {
        let mut out: BTreeSet<PaperIdx> = self
            .judgments
            .iter()
            .filter(|(_, j)| j.label == label)
            .map(|(p, _)| *p)
            .collect();
        if label == Label::Saved {
            out.extend(self.seeds.iter().filter(|p| !self.judgments.contains_key(p)));
        }
        out.into_iter().collect()
    }

    pub fn positives(&self) -> Vec<PaperIdx> {
        self.with_label(Label::Saved)
    }

    pub fn negatives(&self) -> Vec<PaperIdx> {
        self.with_label(Label::Downvoted)
    }

    /// Sort key for "most recently interacted first": explicit judgments by
    /// sequence number, then seeds.
    pub fn recency_key(&self, p: PaperIdx) -> Option<(u64, u64)> {
        match self.judgments.get(&p) {
            Some(j) => Some((j.timestamp, j.seq + 1)),
            None if self.seeds.contains(&p) => Some((self.seed_timestamp, 0)),
            None => None,
        }
    }
}
