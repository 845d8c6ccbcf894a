//! Domain entities and the per-action protocol rules.
//!
//! Every `check_*` function is a pure predicate over an [`EngineState`]
//! snapshot and a proposed entity. The ledger calls them before any
//! mutation, so a rejected action never touches state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ids::{ArticleId, IssueId, ItemUri, ReviewId, ScholarId};
use crate::ledger::EngineState;

/// Default minimum number of curated entries in a released issue.
pub const MIN_ISSUE_SIZE: usize = 4;

/// Logical position in the event log (the event `seq`).
pub type SeqNo = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scholar {
    pub scholar_id: ScholarId,
    pub display_name: String,
    pub registered_at: SeqNo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub article_id: ArticleId,
    pub canonical_uri: ItemUri,
    pub authors: BTreeSet<ScholarId>,
    pub versions: Vec<ArticleVersion>,
}

impl Article {
    pub fn current_version(&self) -> u32 {
        self.versions.len() as u32
    }

    pub fn version(&self, number: u32) -> Option<&ArticleVersion> {
        number
            .checked_sub(1)
            .and_then(|i| self.versions.get(i as usize))
    }

    pub fn is_author(&self, scholar: &ScholarId) -> bool {
        self.authors.contains(scholar)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleVersion {
    pub number: u32,
    pub content_digest: String,
    pub acknowledged_reviews: BTreeSet<ReviewId>,
    pub created_at: SeqNo,
}

/// A signed public review. Immutable once posted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: ReviewId,
    pub article_id: ArticleId,
    pub target_version: u32,
    pub reviewer: ScholarId,
    pub body: String,
    pub posted_at: SeqNo,
}

/// A +/- judgement on a review. Serialized as the integers `1` and `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VoteSign {
    Up,
    Down,
}

impl VoteSign {
    pub fn as_i8(self) -> i8 {
        match self {
            VoteSign::Up => 1,
            VoteSign::Down => -1,
        }
    }
}

impl Serialize for VoteSign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for VoteSign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match i64::deserialize(d)? {
            1 => Ok(VoteSign::Up),
            -1 => Ok(VoteSign::Down),
            other => Err(serde::de::Error::custom(format!(
                "review vote sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewVote {
    pub voter: ScholarId,
    pub review_id: ReviewId,
    pub sign: VoteSign,
    pub cast_at: SeqNo,
}

/// The two validity options: "this article has reached scientific
/// standards" and "this article still needs revisions".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidityChoice {
    ReachedStandards,
    NeedsRevisions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityVote {
    pub voter: ScholarId,
    pub article_id: ArticleId,
    pub choice: ValidityChoice,
    pub substantiation: Option<ReviewId>,
    pub version_seen: u32,
    pub cast_at: SeqNo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityMark {
    pub scholar_id: ScholarId,
    pub item: ItemUri,
    pub active: bool,
    pub toggled_at: SeqNo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfJournal {
    pub owner: ScholarId,
    pub issues: Vec<IssueId>,
    pub subscribers: BTreeSet<ScholarId>,
}

impl SelfJournal {
    pub fn new(owner: ScholarId) -> Self {
        Self {
            owner,
            issues: Vec::new(),
            subscribers: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub issue_id: IssueId,
    pub journal_owner: ScholarId,
    pub title: String,
    pub editorial: String,
    pub entries: Vec<CuratedEntry>,
    pub released_at: SeqNo,
}

/// Any hyperlinked item; it need not be hosted on the platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedEntry {
    pub item: ItemUri,
    pub comment: Option<String>,
}

/// A broken protocol rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleViolation {
    #[error("sequence gap: expected seq {expected}, got {found}")]
    SequenceGap { expected: SeqNo, found: SeqNo },
    #[error("unknown scholar {0}")]
    UnknownScholar(ScholarId),
    #[error("scholar {0} is already registered")]
    DuplicateScholar(ScholarId),
    #[error("display name must not be empty")]
    EmptyDisplayName,
    #[error("unknown article {0}")]
    UnknownArticle(ArticleId),
    #[error("article {0} already exists")]
    DuplicateArticle(ArticleId),
    #[error("another article already uses canonical uri {0}")]
    DuplicateArticleUri(ItemUri),
    #[error("an article needs at least one author")]
    NoAuthors,
    #[error("{0}")]
    InvalidUri(String),
    #[error("unknown version {version} of article {article}")]
    UnknownVersion { article: ArticleId, version: u32 },
    #[error("expected version {expected}, got {found}")]
    NonConsecutiveVersion { expected: u32, found: u32 },
    #[error("review {review} does not target an earlier version of article {article}")]
    ForeignReviewAcknowledged {
        article: ArticleId,
        review: ReviewId,
    },
    #[error("unknown review {0}")]
    UnknownReview(ReviewId),
    #[error("review {0} already exists")]
    DuplicateReview(ReviewId),
    #[error("{reviewer} is an author of {article} and cannot review it")]
    AuthorSelfReview {
        article: ArticleId,
        reviewer: ScholarId,
    },
    #[error("review body must not be empty")]
    EmptyBody,
    #[error("{voter} cannot vote on their own review {review}")]
    SelfReviewVote { voter: ScholarId, review: ReviewId },
    #[error("{voter} is an author of {article} and cannot cast a validity vote on it")]
    AuthorSelfVote {
        article: ArticleId,
        voter: ScholarId,
    },
    #[error("a needs-revisions vote must cite a review")]
    MissingSubstantiation,
    #[error("review {review} neither authored nor up-voted by {voter} for article {article}")]
    InvalidSubstantiation {
        voter: ScholarId,
        article: ArticleId,
        review: ReviewId,
    },
    #[error("a reached-standards vote must not cite a review")]
    SuperfluousSubstantiation,
    #[error("priority toggle must alternate; {scholar} already has active={active} on {item}")]
    NonAlternatingMark {
        scholar: ScholarId,
        item: ItemUri,
        active: bool,
    },
    #[error("issue {0} already exists")]
    DuplicateIssue(IssueId),
    #[error("issue has {found} entries, minimum is {min}")]
    TooFewEntries { found: usize, min: usize },
    #[error("item {0} appears more than once in the issue")]
    DuplicateEntry(ItemUri),
    #[error("issue title must not be empty")]
    EmptyTitle,
    #[error("issue editorial must not be empty")]
    EmptyEditorial,
}

impl RuleViolation {
    /// Stable rule name, used in machine-readable output.
    pub fn rule(&self) -> &'static str {
        use RuleViolation::*;
        match self {
            SequenceGap { .. } => "SequenceGap",
            UnknownScholar(_) => "UnknownScholar",
            DuplicateScholar(_) => "DuplicateScholar",
            EmptyDisplayName => "EmptyDisplayName",
            UnknownArticle(_) => "UnknownArticle",
            DuplicateArticle(_) => "DuplicateArticle",
            DuplicateArticleUri(_) => "DuplicateArticleUri",
            NoAuthors => "NoAuthors",
            InvalidUri(_) => "InvalidUri",
            UnknownVersion { .. } => "UnknownVersion",
            NonConsecutiveVersion { .. } => "NonConsecutiveVersion",
            ForeignReviewAcknowledged { .. } => "ForeignReviewAcknowledged",
            UnknownReview(_) => "UnknownReview",
            DuplicateReview(_) => "DuplicateReview",
            AuthorSelfReview { .. } => "AuthorSelfReview",
            EmptyBody => "EmptyBody",
            SelfReviewVote { .. } => "SelfReviewVote",
            AuthorSelfVote { .. } => "AuthorSelfVote",
            MissingSubstantiation => "MissingSubstantiation",
            InvalidSubstantiation { .. } => "InvalidSubstantiation",
            SuperfluousSubstantiation => "SuperfluousSubstantiation",
            NonAlternatingMark { .. } => "NonAlternatingMark",
            DuplicateIssue(_) => "DuplicateIssue",
            TooFewEntries { .. } => "TooFewEntries",
            DuplicateEntry(_) => "DuplicateEntry",
            EmptyTitle => "EmptyTitle",
            EmptyEditorial => "EmptyEditorial",
        }
    }
}

pub type RuleResult = Result<(), RuleViolation>;

fn require_scholar(state: &EngineState, id: &ScholarId) -> RuleResult {
    if state.scholar(id).is_some() {
        Ok(())
    } else {
        Err(RuleViolation::UnknownScholar(id.clone()))
    }
}

fn require_article<'s>(
    state: &'s EngineState,
    id: &ArticleId,
) -> Result<&'s Article, RuleViolation> {
    state
        .article(id)
        .ok_or_else(|| RuleViolation::UnknownArticle(id.clone()))
}

pub fn check_registration(state: &EngineState, scholar: &Scholar) -> RuleResult {
    if state.scholar(&scholar.scholar_id).is_some() {
        return Err(RuleViolation::DuplicateScholar(scholar.scholar_id.clone()));
    }
    if scholar.display_name.trim().is_empty() {
        return Err(RuleViolation::EmptyDisplayName);
    }
    Ok(())
}

pub fn check_submission(state: &EngineState, article: &Article) -> RuleResult {
    if state.article(&article.article_id).is_some() {
        return Err(RuleViolation::DuplicateArticle(article.article_id.clone()));
    }
    if article.authors.is_empty() {
        return Err(RuleViolation::NoAuthors);
    }
    for author in &article.authors {
        require_scholar(state, author)?;
    }
    if state.article_for_item(&article.canonical_uri).is_some() {
        return Err(RuleViolation::DuplicateArticleUri(
            article.canonical_uri.clone(),
        ));
    }
    match article.versions.as_slice() {
        [first] if first.number == 1 => {
            if let Some(review) = first.acknowledged_reviews.iter().next() {
                return Err(RuleViolation::ForeignReviewAcknowledged {
                    article: article.article_id.clone(),
                    review: review.clone(),
                });
            }
            Ok(())
        }
        _ => Err(RuleViolation::NonConsecutiveVersion {
            expected: 1,
            found: article.versions.last().map_or(0, |v| v.number),
        }),
    }
}

pub fn check_revision(
    state: &EngineState,
    article_id: &ArticleId,
    new_version: &ArticleVersion,
) -> RuleResult {
    let article = require_article(state, article_id)?;
    let expected = article.current_version() + 1;
    if new_version.number != expected {
        return Err(RuleViolation::NonConsecutiveVersion {
            expected,
            found: new_version.number,
        });
    }
    for review_id in &new_version.acknowledged_reviews {
        let review = state
            .review(review_id)
            .ok_or_else(|| RuleViolation::UnknownReview(review_id.clone()))?;
        if review.article_id != *article_id || review.target_version >= new_version.number {
            return Err(RuleViolation::ForeignReviewAcknowledged {
                article: article_id.clone(),
                review: review_id.clone(),
            });
        }
    }
    Ok(())
}

pub fn check_review(state: &EngineState, review: &Review) -> RuleResult {
    require_scholar(state, &review.reviewer)?;
    let article = require_article(state, &review.article_id)?;
    if state.review(&review.review_id).is_some() {
        return Err(RuleViolation::DuplicateReview(review.review_id.clone()));
    }
    if article.is_author(&review.reviewer) {
        return Err(RuleViolation::AuthorSelfReview {
            article: review.article_id.clone(),
            reviewer: review.reviewer.clone(),
        });
    }
    if article.version(review.target_version).is_none() {
        return Err(RuleViolation::UnknownVersion {
            article: review.article_id.clone(),
            version: review.target_version,
        });
    }
    if review.body.trim().is_empty() {
        return Err(RuleViolation::EmptyBody);
    }
    Ok(())
}

pub fn check_review_vote(state: &EngineState, vote: &ReviewVote) -> RuleResult {
    require_scholar(state, &vote.voter)?;
    let review = state
        .review(&vote.review_id)
        .ok_or_else(|| RuleViolation::UnknownReview(vote.review_id.clone()))?;
    if review.reviewer == vote.voter {
        return Err(RuleViolation::SelfReviewVote {
            voter: vote.voter.clone(),
            review: vote.review_id.clone(),
        });
    }
    Ok(())
}

pub fn check_validity_vote(state: &EngineState, vote: &ValidityVote) -> RuleResult {
    require_scholar(state, &vote.voter)?;
    let article = require_article(state, &vote.article_id)?;
    if article.is_author(&vote.voter) {
        return Err(RuleViolation::AuthorSelfVote {
            article: vote.article_id.clone(),
            voter: vote.voter.clone(),
        });
    }
    if article.version(vote.version_seen).is_none() {
        return Err(RuleViolation::UnknownVersion {
            article: vote.article_id.clone(),
            version: vote.version_seen,
        });
    }
    match (vote.choice, &vote.substantiation) {
        (ValidityChoice::ReachedStandards, None) => Ok(()),
        (ValidityChoice::ReachedStandards, Some(_)) => {
            Err(RuleViolation::SuperfluousSubstantiation)
        }
        (ValidityChoice::NeedsRevisions, None) => Err(RuleViolation::MissingSubstantiation),
        (ValidityChoice::NeedsRevisions, Some(review_id)) => {
            let invalid = || RuleViolation::InvalidSubstantiation {
                voter: vote.voter.clone(),
                article: vote.article_id.clone(),
                review: review_id.clone(),
            };
            let review = state.review(review_id).ok_or_else(invalid)?;
            if review.article_id != vote.article_id {
                return Err(invalid());
            }
            let authored = review.reviewer == vote.voter;
            let upvoted = state
                .review_vote(review_id, &vote.voter)
                .is_some_and(|v| v.sign == VoteSign::Up);
            if authored || upvoted {
                Ok(())
            } else {
                Err(invalid())
            }
        }
    }
}

pub fn check_priority(state: &EngineState, mark: &PriorityMark) -> RuleResult {
    require_scholar(state, &mark.scholar_id)?;
    let current = state
        .priority_mark(&mark.item, &mark.scholar_id)
        .is_some_and(|m| m.active);
    if current == mark.active {
        return Err(RuleViolation::NonAlternatingMark {
            scholar: mark.scholar_id.clone(),
            item: mark.item.clone(),
            active: current,
        });
    }
    Ok(())
}

pub fn check_issue(state: &EngineState, issue: &Issue) -> RuleResult {
    require_scholar(state, &issue.journal_owner)?;
    if state.issue(&issue.issue_id).is_some() {
        return Err(RuleViolation::DuplicateIssue(issue.issue_id.clone()));
    }
    if issue.title.trim().is_empty() {
        return Err(RuleViolation::EmptyTitle);
    }
    if issue.editorial.trim().is_empty() {
        return Err(RuleViolation::EmptyEditorial);
    }
    let min = state.config().min_issue_size;
    if issue.entries.len() < min {
        return Err(RuleViolation::TooFewEntries {
            found: issue.entries.len(),
            min,
        });
    }
    let mut seen = BTreeSet::new();
    for entry in &issue.entries {
        if !seen.insert(&entry.item) {
            return Err(RuleViolation::DuplicateEntry(entry.item.clone()));
        }
    }
    Ok(())
}

pub fn check_subscription(
    state: &EngineState,
    subscriber: &ScholarId,
    owner: &ScholarId,
) -> RuleResult {
    require_scholar(state, subscriber)?;
    require_scholar(state, owner)
}
