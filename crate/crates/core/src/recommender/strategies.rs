//! The four author-sourcing strategies.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::voting::{rank_authors, sort_sample, vote_author, vote_multi};
use super::{RankedAuthorList, Strategy};
use crate::corpus::{AuthorIdx, CorpusIndex, PaperIdx};
use crate::scorer::Relevance;

/// Publications of the committee scoring strictly above zero (feedback
/// applied), best first, at most `limit`.
pub fn get_relevant_papers(
    corpus: &CorpusIndex,
    committee: &[AuthorIdx],
    relevance: &Relevance<'_>,
    limit: usize,
) -> Vec<PaperIdx> {
    let pubs: BTreeSet<PaperIdx> = committee
        .iter()
        .flat_map(|&a| corpus.author(a).papers.iter().copied())
        .collect();
    let scored: Vec<(PaperIdx, f64)> = pubs
        .into_iter()
        .map(|p| (p, relevance.score(p)))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    sort_sample(scored, limit)
}

/// Authors of the folder's saved papers, most frequent first.
pub fn strategy_library(corpus: &CorpusIndex, saved_papers: &[PaperIdx]) -> RankedAuthorList {
    let votes = vote_multi(corpus, saved_papers);
    RankedAuthorList::new(Strategy::LibraryExtracted, rank_authors(corpus, votes))
}

/// The `pool` best-scoring papers published within `window_days` of
/// `now_day` vote for their authors.
pub fn strategy_recent(
    corpus: &CorpusIndex,
    relevance: &Relevance<'_>,
    now_day: i64,
    window_days: i64,
    pool: usize,
) -> RankedAuthorList {
    let recent: Vec<(PaperIdx, f64)> = corpus
        .published_within(now_day, window_days)
        .iter()
        .map(|&p| (p, relevance.score(p)))
        .collect();
    let top = sort_sample(recent, pool);
    let votes = vote_multi(corpus, &top);
    RankedAuthorList::new(Strategy::RecentRelevant, rank_authors(corpus, votes))
}

fn without_committee(
    mut votes: alloc::collections::BTreeMap<AuthorIdx, u32>,
    committee: &[AuthorIdx],
    user: Option<AuthorIdx>,
) -> alloc::collections::BTreeMap<AuthorIdx, u32> {
    for a in committee.iter().copied().chain(user) {
        votes.remove(&a);
    }
    votes
}

/// Coauthors of the committee on its relevant papers.
pub fn strategy_coauthor(
    corpus: &CorpusIndex,
    committee: &[AuthorIdx],
    user: Option<AuthorIdx>,
    relevance: &Relevance<'_>,
    sample: usize,
) -> RankedAuthorList {
    let relevant = get_relevant_papers(corpus, committee, relevance, sample);
    let votes = without_committee(vote_multi(corpus, &relevant), committee, user);
    RankedAuthorList::new(Strategy::CoauthorExpansion, rank_authors(corpus, votes))
}

/// Authors of the references most widely cited by the committee's relevant
/// papers.
pub fn strategy_citation(
    corpus: &CorpusIndex,
    committee: &[AuthorIdx],
    user: Option<AuthorIdx>,
    relevance: &Relevance<'_>,
    sample: usize,
    reference_sample: usize,
) -> RankedAuthorList {
    let relevant_pubs: Vec<(AuthorIdx, Vec<PaperIdx>)> = committee
        .iter()
        .map(|&a| (a, get_relevant_papers(corpus, &[a], relevance, sample)))
        .collect();
    let candidate_refs: BTreeSet<PaperIdx> = relevant_pubs
        .iter()
        .flat_map(|(_, pubs)| pubs.iter())
        .flat_map(|&q| corpus.paper(q).references.iter().copied())
        .collect();
    let ref_votes = vote_author(corpus, &candidate_refs, &relevant_pubs);
    let top_refs = sort_sample(
        ref_votes.into_iter().map(|(p, v)| (p, v as f64)).collect(),
        reference_sample,
    );
    let votes = without_committee(vote_multi(corpus, &top_refs), committee, user);
    RankedAuthorList::new(Strategy::CitationExpansion, rank_authors(corpus, votes))
}
