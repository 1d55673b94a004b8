//! Relevance evidence for author cards: coauthored-with and cited-by tags,
//! paper-level citer labels, publication-year histograms and the relevance
//! ratio that orders a batch.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIdx, CorpusIndex, PaperIdx};
use crate::error::Error;
use crate::feedback::Label;
use crate::recommender::Strategy;
use crate::scorer::Relevance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagKind {
    CoauthoredWith,
    CitedBy,
}

/// Index form of a tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub kind: TagKind,
    pub member: AuthorIdx,
    pub papers: BTreeSet<PaperIdx>,
}

impl Evidence {
    pub fn to_tag(&self, corpus: &CorpusIndex) -> ExplanationTag {
        ExplanationTag {
            kind: self.kind,
            committee_author_id: corpus.author(self.member).id.clone(),
            evidence_paper_ids: self.papers.iter().map(|&p| corpus.paper(p).id.clone()).collect(),
            count: self.papers.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationTag {
    pub kind: TagKind,
    pub committee_author_id: String,
    /// Candidate papers backing the tag, ascending by ID.
    pub evidence_paper_ids: Vec<String>,
    pub count: usize,
}

/// One `CoauthoredWith` entry per committee member sharing a paper with
/// `candidate`; evidence is the shared papers.
pub fn coauthor_evidence(corpus: &CorpusIndex, candidate: AuthorIdx, committee: &[AuthorIdx]) -> Vec<Evidence> {
    let mut out = Vec::new();
    for &member in committee {
        if member == candidate {
            continue;
        }
        let papers: BTreeSet<PaperIdx> = corpus
            .author(candidate)
            .papers
            .iter()
            .copied()
            .filter(|&p| corpus.paper(p).has_author(member))
            .collect();
        if !papers.is_empty() {
            out.push(Evidence { kind: TagKind::CoauthoredWith, member, papers });
        }
    }
    sort_evidence(&mut out);
    out
}

/// One `CitedBy` entry per committee member with a paper citing one of
/// `candidate`'s papers. Self-citations (the member wrote the cited paper
/// too) never count. Evidence is the cited candidate papers.
pub fn citedby_evidence(corpus: &CorpusIndex, candidate: AuthorIdx, committee: &[AuthorIdx]) -> Vec<Evidence> {
    let mut out = Vec::new();
    for &member in committee {
        if member == candidate {
            continue;
        }
        let papers: BTreeSet<PaperIdx> = corpus
            .author(candidate)
            .papers
            .iter()
            .copied()
            .filter(|&p| !corpus.paper(p).has_author(member))
            .filter(|&p| corpus.citing(p).iter().any(|&q| corpus.paper(q).has_author(member)))
            .collect();
        if !papers.is_empty() {
            out.push(Evidence { kind: TagKind::CitedBy, member, papers });
        }
    }
    sort_evidence(&mut out);
    out
}

fn sort_evidence(ev: &mut [Evidence]) {
    ev.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then_with(|| b.papers.len().cmp(&a.papers.len()))
            .then_with(|| a.member.cmp(&b.member))
    });
}

/// All evidence for a candidate: coauthor tags first, then cited-by tags.
pub fn all_evidence(corpus: &CorpusIndex, candidate: AuthorIdx, committee: &[AuthorIdx]) -> Vec<Evidence> {
    let mut ev = coauthor_evidence(corpus, candidate, committee);
    ev.extend(citedby_evidence(corpus, candidate, committee));
    ev
}

pub fn coauthor_tags(corpus: &CorpusIndex, candidate: AuthorIdx, committee: &[AuthorIdx]) -> Vec<ExplanationTag> {
    coauthor_evidence(corpus, candidate, committee)
        .iter()
        .map(|e| e.to_tag(corpus))
        .collect()
}

pub fn citedby_tags(corpus: &CorpusIndex, candidate: AuthorIdx, committee: &[AuthorIdx]) -> Vec<ExplanationTag> {
    citedby_evidence(corpus, candidate, committee)
        .iter()
        .map(|e| e.to_tag(corpus))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiterLabel {
    pub author_id: String,
    pub count: u32,
}

/// Committee members who cite `paper` most often (self-citations excluded),
/// at most `limit`. Ties: more publications first, then ascending ID.
pub fn paper_citer_labels(
    corpus: &CorpusIndex,
    paper: PaperIdx,
    committee: &[AuthorIdx],
    limit: usize,
) -> Vec<(AuthorIdx, u32)> {
    let mut counts: Vec<(AuthorIdx, u32)> = committee
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|a| (a, corpus.citation_count_by(a, paper)))
        .filter(|&(_, n)| n > 0)
        .collect();
    counts.sort_by(|(a, na), (b, nb)| {
        nb.cmp(na)
            .then_with(|| corpus.author(*b).papers.len().cmp(&corpus.author(*a).papers.len()))
            .then_with(|| a.cmp(b))
    });
    counts.truncate(limit);
    counts
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearBin {
    pub year: i32,
    pub total: u32,
    pub relevant: u32,
    pub tag_overlay: u32,
}

/// Publication counts per year, with the predicted-relevant overlay
/// (score > 0) and, when a tag is selected, the tag's evidence papers.
pub fn year_histogram(
    corpus: &CorpusIndex,
    author: AuthorIdx,
    relevance: &Relevance<'_>,
    selected: Option<&BTreeSet<PaperIdx>>,
) -> Vec<YearBin> {
    let mut bins: BTreeMap<i32, YearBin> = BTreeMap::new();
    for &p in &corpus.author(author).papers {
        let year = corpus.paper(p).year;
        let bin = bins.entry(year).or_insert(YearBin { year, ..Default::default() });
        bin.total += 1;
        if relevance.score(p) > 0.0 {
            bin.relevant += 1;
        }
        if selected.is_some_and(|s| s.contains(&p)) {
            bin.tag_overlay += 1;
        }
    }
    bins.into_values().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredPaper {
    pub paper_id: String,
    pub title: String,
    pub year: i32,
    /// Model score when the card was built, before feedback overwrite.
    pub score: f64,
    pub label: Option<Label>,
    pub cited_by: Vec<CiterLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPublications {
    /// Already-judged papers, most recently judged first.
    pub judged_stack: Vec<ScoredPaper>,
    /// Unjudged papers by descending score, ties by ascending ID.
    pub ranked: Vec<ScoredPaper>,
    pub default_visible: usize,
}

pub const CITER_LABEL_LIMIT: usize = 3;

pub fn rank_publications(
    corpus: &CorpusIndex,
    author: AuthorIdx,
    relevance: &Relevance<'_>,
    committee: &[AuthorIdx],
    default_visible: usize,
) -> RankedPublications {
    let feedback = relevance.feedback();
    let (mut judged, mut unjudged): (Vec<PaperIdx>, Vec<PaperIdx>) = corpus
        .author(author)
        .papers
        .iter()
        .partition(|&&p| feedback.is_judged(p));
    judged.sort_by(|a, b| feedback.recency_key(*b).cmp(&feedback.recency_key(*a)).then_with(|| a.cmp(b)));
    unjudged.sort_by(|a, b| {
        relevance
            .model_score(*b)
            .total_cmp(&relevance.model_score(*a))
            .then_with(|| a.cmp(b))
    });
    let render = |p: PaperIdx| {
        let paper = corpus.paper(p);
        ScoredPaper {
            paper_id: paper.id.clone(),
            title: paper.title.clone(),
            year: paper.year,
            score: relevance.model_score(p),
            label: feedback.label(p),
            cited_by: paper_citer_labels(corpus, p, committee, CITER_LABEL_LIMIT)
                .into_iter()
                .map(|(a, count)| CiterLabel { author_id: corpus.author(a).id.clone(), count })
                .collect(),
        }
    };
    RankedPublications {
        judged_stack: judged.into_iter().map(render).collect(),
        ranked: unjudged.into_iter().map(render).collect(),
        default_visible,
    }
}

/// Unique evidence papers across all tags over total publications.
pub fn relevance_ratio(tags: &[ExplanationTag], total_papers: usize) -> f64 {
    if total_papers == 0 {
        return 0.0;
    }
    let unique: BTreeSet<&str> = tags
        .iter()
        .flat_map(|t| t.evidence_paper_ids.iter().map(String::as_str))
        .collect();
    unique.len() as f64 / total_papers as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorCard {
    pub author_id: String,
    pub display_name: String,
    pub strategy_origin: Option<Strategy>,
    pub tags: Vec<ExplanationTag>,
    pub relevant_paper_count: usize,
    pub total_paper_count: usize,
    pub saved_paper_count: usize,
    pub downvoted_paper_count: usize,
    pub h_index: Option<u32>,
    pub citation_count: u64,
    pub histogram: Vec<YearBin>,
    pub relevance_ratio: f64,
    pub publications: RankedPublications,
    /// Index into `tags` of the active evidence filter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_tag: Option<usize>,
}

impl AuthorCard {
    pub fn relevance_ratio(&self) -> f64 {
        relevance_ratio(&self.tags, self.total_paper_count)
    }
}

/// Builds a card with a frozen snapshot of the current scores.
pub fn build_card(
    corpus: &CorpusIndex,
    candidate: AuthorIdx,
    origin: Option<Strategy>,
    committee: &[AuthorIdx],
    relevance: &Relevance<'_>,
    default_visible: usize,
) -> AuthorCard {
    let author = corpus.author(candidate);
    let tags: Vec<ExplanationTag> = all_evidence(corpus, candidate, committee)
        .iter()
        .map(|e| e.to_tag(corpus))
        .collect();
    let feedback = relevance.feedback();
    let count_label = |l: Label| author.papers.iter().filter(|&&p| feedback.label(p) == Some(l)).count();
    AuthorCard {
        author_id: author.id.clone(),
        display_name: author.display_name.clone(),
        strategy_origin: origin,
        relevance_ratio: relevance_ratio(&tags, author.papers.len()),
        tags,
        relevant_paper_count: author.papers.iter().filter(|&&p| relevance.score(p) > 0.0).count(),
        total_paper_count: author.papers.len(),
        saved_paper_count: count_label(Label::Saved),
        downvoted_paper_count: count_label(Label::Downvoted),
        h_index: author.h_index,
        citation_count: author.citation_count,
        histogram: year_histogram(corpus, candidate, relevance, None),
        publications: rank_publications(corpus, candidate, relevance, committee, default_visible),
        selected_tag: None,
    }
}

/// Narrows a card to one tag: publications are filtered to the tag's
/// evidence papers and the histogram gains the matching overlay counts.
pub fn select_tag(
    corpus: &CorpusIndex,
    card: &mut AuthorCard,
    relevance: &Relevance<'_>,
    tag: usize,
) -> Result<(), Error> {
    let candidate = corpus.require_author(&card.author_id)?;
    let evidence = &card.tags.get(tag).ok_or(Error::UnknownTag(tag))?.evidence_paper_ids;
    let selected: BTreeSet<PaperIdx> = evidence.iter().filter_map(|id| corpus.paper_idx(id)).collect();
    let keep = |p: &ScoredPaper| evidence.contains(&p.paper_id);
    card.publications.judged_stack.retain(keep);
    card.publications.ranked.retain(keep);
    card.histogram = year_histogram(corpus, candidate, relevance, Some(&selected));
    card.selected_tag = Some(tag);
    Ok(())
}

/// Presentation order: relevance ratio descending, then ascending author ID.
pub fn order_cards(cards: &mut [AuthorCard]) {
    cards.sort_by(|a, b| match b.relevance_ratio.total_cmp(&a.relevance_ratio) {
        Ordering::Equal => a.author_id.cmp(&b.author_id),
        o => o,
    });
}
