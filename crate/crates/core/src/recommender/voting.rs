use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::corpus::{AuthorIdx, CorpusIndex, PaperIdx};

/// Sorts `(item, key)` pairs by key descending, ties by ascending item, and
/// keeps the first `n` items.
pub fn sort_sample<T: Ord + Copy>(mut items: Vec<(T, f64)>, n: usize) -> Vec<T> {
    items.sort_by(|(a, ka), (b, kb)| kb.total_cmp(ka).then_with(|| a.cmp(b)));
    items.into_iter().take(n).map(|(item, _)| item).collect()
}

/// Every paper adds one vote to each of its authors.
pub fn vote_multi(corpus: &CorpusIndex, papers: &[PaperIdx]) -> BTreeMap<AuthorIdx, u32> {
    let mut votes = BTreeMap::new();
    for &p in papers {
        for &a in &corpus.paper(p).authors {
            *votes.entry(a).or_insert(0) += 1;
        }
    }
    votes
}

/// Each committee member casts at most one vote per candidate reference: `a`
/// votes for `r` iff one of `a`'s relevant papers cites `r` and `a` did not
/// write `r`.
pub fn vote_author(
    corpus: &CorpusIndex,
    candidate_refs: &BTreeSet<PaperIdx>,
    relevant_pubs: &[(AuthorIdx, Vec<PaperIdx>)],
) -> BTreeMap<PaperIdx, u32> {
    let mut votes = BTreeMap::new();
    for (member, pubs) in relevant_pubs {
        let cited: BTreeSet<PaperIdx> = pubs
            .iter()
            .flat_map(|&q| corpus.paper(q).references.iter().copied())
            .filter(|r| candidate_refs.contains(r))
            .filter(|&r| !corpus.paper(r).has_author(*member))
            .collect();
        for r in cited {
            *votes.entry(r).or_insert(0) += 1;
        }
    }
    votes
}

/// Orders authors by votes, then publication count (both descending), then
/// ascending author ID.
pub fn rank_authors(corpus: &CorpusIndex, votes: BTreeMap<AuthorIdx, u32>) -> Vec<(AuthorIdx, u32)> {
    let mut ranked: Vec<(AuthorIdx, u32)> = votes.into_iter().collect();
    ranked.sort_by(|(a, va), (b, vb)| {
        vb.cmp(va)
            .then_with(|| corpus.author(*b).papers.len().cmp(&corpus.author(*a).papers.len()))
            .then_with(|| a.cmp(b))
    });
    ranked
}
