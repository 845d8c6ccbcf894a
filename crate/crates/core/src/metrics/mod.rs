//! Article-level quantifiers: validity, importance and priority, plus
//! review scores, reviewer acknowledgment and the curation networks.
//!
//! Everything here is a pure read over an [`EngineState`] snapshot.

mod export;
mod graph;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

pub use export::{
    decimal_4, item_metrics, metrics_to_csv, metrics_to_json, ItemFilter, ItemMetrics,
    ValidityExport,
};
pub use graph::{curation_graph, CurationGraph};

use crate::ids::{ArticleId, IssueId, ItemUri, ReviewId, ScholarId};
use crate::ledger::EngineState;
use crate::model::{ValidityChoice, VoteSign};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("unknown article {0}")]
    UnknownArticle(ArticleId),
    #[error("unknown version {version} of article {article}")]
    UnknownVersion { article: ArticleId, version: u32 },
    #[error("unknown review {0}")]
    UnknownReview(ReviewId),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VersionTally {
    pub voters: u64,
    pub validated: u64,
}

/// Number of current voters and the exact fraction who validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityTally {
    pub voter_count: u64,
    pub validated_count: u64,
    /// `validated_count / voter_count`; `None` when nobody voted.
    pub fraction: Option<Ratio<u64>>,
    /// The same votes grouped by the version the voter saw.
    pub per_version: BTreeMap<u32, VersionTally>,
}

impl ValidityTally {
    fn from_votes<'a>(votes: impl Iterator<Item = (u32, ValidityChoice)> + 'a) -> Self {
        let mut per_version: BTreeMap<u32, VersionTally> = BTreeMap::new();
        let (mut n, mut validated) = (0u64, 0u64);
        for (version, choice) in votes {
            let slot = per_version.entry(version).or_default();
            slot.voters += 1;
            n += 1;
            if choice == ValidityChoice::ReachedStandards {
                slot.validated += 1;
                validated += 1;
            }
        }
        Self {
            voter_count: n,
            validated_count: validated,
            fraction: (n > 0).then(|| Ratio::new(validated, n)),
            per_version,
        }
    }
}

pub fn validity_tally(
    state: &EngineState,
    article: &ArticleId,
) -> Result<ValidityTally, MetricsError> {
    if state.article(article).is_none() {
        return Err(MetricsError::UnknownArticle(article.clone()));
    }
    Ok(ValidityTally::from_votes(
        state
            .validity_votes_for(article)
            .map(|v| (v.version_seen, v.choice)),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportanceCount {
    pub item: ItemUri,
    pub curators: BTreeSet<ScholarId>,
    pub count: usize,
}

/// One author-excluded curation relation: `curator` included `item` in
/// `issues` and is not among the item's known authors.
#[derive(Debug, Clone, Copy)]
pub struct PeerCuration<'a> {
    pub curator: &'a ScholarId,
    pub item: &'a ItemUri,
    /// Authors of the item when it is platform-hosted.
    pub authors: Option<&'a BTreeSet<ScholarId>>,
    pub issues: &'a [IssueId],
}

/// Item → curator → issues, built in one pass over released issues.
///
/// Items are keyed by normalized URI, so trivially different spellings of
/// one item land on the same entry.
#[derive(Debug, Clone, Default)]
pub struct CurationIndex {
    by_item: BTreeMap<ItemUri, BTreeMap<ScholarId, Vec<IssueId>>>,
}

impl CurationIndex {
    pub fn build(state: &EngineState) -> Self {
        let mut by_item: BTreeMap<ItemUri, BTreeMap<ScholarId, Vec<IssueId>>> = BTreeMap::new();
        for issue in state.issues().values() {
            for entry in &issue.entries {
                by_item
                    .entry(entry.item.clone())
                    .or_default()
                    .entry(issue.journal_owner.clone())
                    .or_default()
                    .push(issue.issue_id.clone());
            }
        }
        Self { by_item }
    }

    pub fn items(&self) -> impl Iterator<Item = &ItemUri> {
        self.by_item.keys()
    }

    /// Every scholar who included `item` in an issue, authors included.
    pub fn raw_curators(&self, item: &ItemUri) -> impl Iterator<Item = &ScholarId> {
        self.by_item.get(item).into_iter().flat_map(|m| m.keys())
    }

    pub fn importance(&self, state: &EngineState, item: &ItemUri) -> ImportanceCount {
        let authors = state.article_for_item(item).map(|a| &a.authors);
        let curators: BTreeSet<ScholarId> = self
            .raw_curators(item)
            .filter(|c| authors.is_none_or(|a| !a.contains(*c)))
            .cloned()
            .collect();
        ImportanceCount {
            item: item.clone(),
            count: curators.len(),
            curators,
        }
    }

    /// All author-excluded (curator, item) relations in canonical order.
    pub fn peer_curations<'a>(
        &'a self,
        state: &'a EngineState,
    ) -> impl Iterator<Item = PeerCuration<'a>> + 'a {
        self.by_item.iter().flat_map(move |(item, curators)| {
            let authors = state.article_for_item(item).map(|a| &a.authors);
            curators
                .iter()
                .filter(move |(c, _)| authors.is_none_or(|a| !a.contains(*c)))
                .map(move |(curator, issues)| PeerCuration {
                    curator,
                    item,
                    authors,
                    issues,
                })
        })
    }
}

/// Distinct non-author curators of `item` across all released issues.
pub fn importance(state: &EngineState, item: &ItemUri) -> ImportanceCount {
    let authors = state.article_for_item(item).map(|a| &a.authors);
    let curators: BTreeSet<ScholarId> = state
        .issues()
        .values()
        .filter(|issue| issue.entries.iter().any(|e| &e.item == item))
        .map(|issue| &issue.journal_owner)
        .filter(|c| authors.is_none_or(|a| !a.contains(*c)))
        .cloned()
        .collect();
    ImportanceCount {
        item: item.clone(),
        count: curators.len(),
        curators,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PriorityCount {
    pub item: ItemUri,
    pub count: usize,
}

pub fn priority(state: &EngineState, item: &ItemUri) -> PriorityCount {
    PriorityCount {
        item: item.clone(),
        count: state.priority_marks_for(item).filter(|m| m.active).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReviewScore {
    pub up: u64,
    pub down: u64,
}

pub fn review_score(state: &EngineState, review: &ReviewId) -> Result<ReviewScore, MetricsError> {
    if state.review(review).is_none() {
        return Err(MetricsError::UnknownReview(review.clone()));
    }
    let mut score = ReviewScore { up: 0, down: 0 };
    for vote in state.review_votes_for(review) {
        match vote.sign {
            VoteSign::Up => score.up += 1,
            VoteSign::Down => score.down += 1,
        }
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AcknowledgmentRecord {
    pub article_id: ArticleId,
    pub version: u32,
    pub reviewers: BTreeSet<ScholarId>,
}

/// Authors of every review acknowledged by versions `2..=version`.
pub fn acknowledged_reviewers(
    state: &EngineState,
    article_id: &ArticleId,
    version: u32,
) -> Result<AcknowledgmentRecord, MetricsError> {
    let article = state
        .article(article_id)
        .ok_or_else(|| MetricsError::UnknownArticle(article_id.clone()))?;
    if article.version(version).is_none() {
        return Err(MetricsError::UnknownVersion {
            article: article_id.clone(),
            version,
        });
    }
    let reviewers = article.versions[..version as usize]
        .iter()
        .flat_map(|v| &v.acknowledged_reviews)
        .filter_map(|r| state.review(r))
        .map(|r| r.reviewer.clone())
        .collect();
    Ok(AcknowledgmentRecord {
        article_id: article_id.clone(),
        version,
        reviewers,
    })
}
