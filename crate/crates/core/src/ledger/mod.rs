//! Append-only event log, deterministic replay and state digests.
//!
//! [`EngineState`] is derived exclusively by folding validated events. Every
//! map is a `BTreeMap`, so iteration, serialization and the [`StateDigest`]
//! are canonical regardless of the order in which entries were inserted.

mod codec;
mod event;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

pub use codec::{
    encode_event, load_log, load_log_with, save_log, LoadedLog, ParseError, ParseMode, SkippedEvent,
};
pub use event::{
    ArticleRevised, ArticleSubmitted, EntryPayload, Event, EventKind, EventPayload, IssueReleased,
    PriorityToggled, ReviewPosted, ReviewVoteCast, ScholarRegistered, SubscriptionChanged,
    ValidityVoteCast,
};

use crate::ids::{ArticleId, IssueId, ItemUri, ReviewId, ScholarId};
use crate::model::{
    self, Article, ArticleVersion, CuratedEntry, Issue, PriorityMark, Review, ReviewVote,
    RuleViolation, Scholar, SelfJournal, SeqNo, ValidityVote, MIN_ISSUE_SIZE,
};

/// Deployment-level protocol constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolConfig {
    pub min_issue_size: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            min_issue_size: MIN_ISSUE_SIZE,
        }
    }
}

fn entries<K: Serialize, V: Serialize, S: Serializer>(
    map: &BTreeMap<K, V>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(map.iter())
}

/// Aggregate of everything the log has established so far.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EngineState {
    config: ProtocolConfig,
    last_seq: SeqNo,
    #[serde(serialize_with = "entries")]
    scholars: BTreeMap<ScholarId, Scholar>,
    #[serde(serialize_with = "entries")]
    articles: BTreeMap<ArticleId, Article>,
    #[serde(serialize_with = "entries")]
    article_uris: BTreeMap<ItemUri, ArticleId>,
    #[serde(serialize_with = "entries")]
    reviews: BTreeMap<ReviewId, Review>,
    #[serde(serialize_with = "entries")]
    review_votes: BTreeMap<(ReviewId, ScholarId), ReviewVote>,
    #[serde(serialize_with = "entries")]
    validity_votes: BTreeMap<(ArticleId, ScholarId), ValidityVote>,
    #[serde(serialize_with = "entries")]
    priority_marks: BTreeMap<(ItemUri, ScholarId), PriorityMark>,
    #[serde(serialize_with = "entries")]
    journals: BTreeMap<ScholarId, SelfJournal>,
    #[serde(serialize_with = "entries")]
    issues: BTreeMap<IssueId, Issue>,
}

/// Hex SHA-256 of the canonical serialization of an [`EngineState`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct StateDigest(pub String);

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event seq {seq} rejected: {violation}")]
pub struct ReplayError {
    pub seq: SeqNo,
    pub violation: RuleViolation,
}

fn parse_uri(raw: &str) -> Result<ItemUri, RuleViolation> {
    ItemUri::parse(raw).map_err(|e| RuleViolation::InvalidUri(e.to_string()))
}

impl EngineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: ProtocolConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn last_seq(&self) -> SeqNo {
        self.last_seq
    }

    pub fn scholar(&self, id: &ScholarId) -> Option<&Scholar> {
        self.scholars.get(id)
    }

    pub fn scholars(&self) -> &BTreeMap<ScholarId, Scholar> {
        &self.scholars
    }

    pub fn article(&self, id: &ArticleId) -> Option<&Article> {
        self.articles.get(id)
    }

    pub fn articles(&self) -> &BTreeMap<ArticleId, Article> {
        &self.articles
    }

    /// The platform-hosted article whose canonical URI is `item`, if any.
    pub fn article_for_item(&self, item: &ItemUri) -> Option<&Article> {
        self.article_uris
            .get(item)
            .and_then(|id| self.articles.get(id))
    }

    pub fn review(&self, id: &ReviewId) -> Option<&Review> {
        self.reviews.get(id)
    }

    pub fn reviews(&self) -> &BTreeMap<ReviewId, Review> {
        &self.reviews
    }

    pub fn review_vote(&self, review: &ReviewId, voter: &ScholarId) -> Option<&ReviewVote> {
        self.review_votes.get(&(review.clone(), voter.clone()))
    }

    /// Current (latest) vote per voter on `review`.
    pub fn review_votes_for<'a>(
        &'a self,
        review: &'a ReviewId,
    ) -> impl Iterator<Item = &'a ReviewVote> + 'a {
        let start = (review.clone(), ScholarId::new(""));
        self.review_votes
            .range(start..)
            .take_while(move |((r, _), _)| r == review)
            .map(|(_, v)| v)
    }

    pub fn review_votes(&self) -> impl Iterator<Item = &ReviewVote> {
        self.review_votes.values()
    }

    /// Current (latest) validity vote per voter on `article`.
    pub fn validity_votes_for<'a>(
        &'a self,
        article: &'a ArticleId,
    ) -> impl Iterator<Item = &'a ValidityVote> + 'a {
        let start = (article.clone(), ScholarId::new(""));
        self.validity_votes
            .range(start..)
            .take_while(move |((a, _), _)| a == article)
            .map(|(_, v)| v)
    }

    pub fn validity_votes(&self) -> impl Iterator<Item = &ValidityVote> {
        self.validity_votes.values()
    }

    pub fn priority_mark(&self, item: &ItemUri, scholar: &ScholarId) -> Option<&PriorityMark> {
        self.priority_marks.get(&(item.clone(), scholar.clone()))
    }

    pub fn priority_marks_for<'a>(
        &'a self,
        item: &'a ItemUri,
    ) -> impl Iterator<Item = &'a PriorityMark> + 'a {
        let start = (item.clone(), ScholarId::new(""));
        self.priority_marks
            .range(start..)
            .take_while(move |((i, _), _)| i == item)
            .map(|(_, m)| m)
    }

    pub fn priority_marks(&self) -> impl Iterator<Item = &PriorityMark> {
        self.priority_marks.values()
    }

    pub fn journal(&self, owner: &ScholarId) -> Option<&SelfJournal> {
        self.journals.get(owner)
    }

    pub fn journals(&self) -> &BTreeMap<ScholarId, SelfJournal> {
        &self.journals
    }

    pub fn issue(&self, id: &IssueId) -> Option<&Issue> {
        self.issues.get(id)
    }

    pub fn issues(&self) -> &BTreeMap<IssueId, Issue> {
        &self.issues
    }

    /// Validates `event` against the current state and applies it.
    ///
    /// On error the state is left untouched.
    pub fn apply(&mut self, event: &Event) -> Result<(), RuleViolation> {
        let expected = self.last_seq + 1;
        if event.seq != expected {
            return Err(RuleViolation::SequenceGap {
                expected,
                found: event.seq,
            });
        }
        let seq = event.seq;
        match &event.payload {
            EventPayload::ScholarRegistered(p) => {
                let scholar = Scholar {
                    scholar_id: p.scholar.clone(),
                    display_name: p.display_name.clone(),
                    registered_at: seq,
                };
                model::check_registration(self, &scholar)?;
                self.journals.insert(
                    scholar.scholar_id.clone(),
                    SelfJournal::new(scholar.scholar_id.clone()),
                );
                self.scholars.insert(scholar.scholar_id.clone(), scholar);
            }
            EventPayload::ArticleSubmitted(p) => {
                let article = Article {
                    article_id: p.article.clone(),
                    canonical_uri: parse_uri(&p.uri)?,
                    authors: p.authors.iter().cloned().collect(),
                    versions: vec![ArticleVersion {
                        number: 1,
                        content_digest: p.content_digest.clone(),
                        acknowledged_reviews: BTreeSet::new(),
                        created_at: seq,
                    }],
                };
                model::check_submission(self, &article)?;
                self.article_uris
                    .insert(article.canonical_uri.clone(), article.article_id.clone());
                self.articles.insert(article.article_id.clone(), article);
            }
            EventPayload::ArticleRevised(p) => {
                let version = ArticleVersion {
                    number: p.version,
                    content_digest: p.content_digest.clone(),
                    acknowledged_reviews: p.acknowledged_reviews.iter().cloned().collect(),
                    created_at: seq,
                };
                model::check_revision(self, &p.article, &version)?;
                self.articles
                    .get_mut(&p.article)
                    .expect("checked by check_revision")
                    .versions
                    .push(version);
            }
            EventPayload::ReviewPosted(p) => {
                let review = Review {
                    review_id: p.review.clone(),
                    article_id: p.article.clone(),
                    target_version: p.target_version,
                    reviewer: p.reviewer.clone(),
                    body: p.body.clone(),
                    posted_at: seq,
                };
                model::check_review(self, &review)?;
                self.reviews.insert(review.review_id.clone(), review);
            }
            EventPayload::ReviewVoteCast(p) => {
                let vote = ReviewVote {
                    voter: p.voter.clone(),
                    review_id: p.review.clone(),
                    sign: p.sign,
                    cast_at: seq,
                };
                model::check_review_vote(self, &vote)?;
                self.review_votes
                    .insert((vote.review_id.clone(), vote.voter.clone()), vote);
            }
            EventPayload::ValidityVoteCast(p) => {
                let vote = ValidityVote {
                    voter: p.voter.clone(),
                    article_id: p.article.clone(),
                    choice: p.choice,
                    substantiation: p.substantiation.clone(),
                    version_seen: p.version_seen,
                    cast_at: seq,
                };
                model::check_validity_vote(self, &vote)?;
                self.validity_votes
                    .insert((vote.article_id.clone(), vote.voter.clone()), vote);
            }
            EventPayload::PriorityToggled(p) => {
                let mark = PriorityMark {
                    scholar_id: p.scholar.clone(),
                    item: parse_uri(&p.item)?,
                    active: p.active,
                    toggled_at: seq,
                };
                model::check_priority(self, &mark)?;
                self.priority_marks
                    .insert((mark.item.clone(), mark.scholar_id.clone()), mark);
            }
            EventPayload::IssueReleased(p) => {
                let entries = p
                    .entries
                    .iter()
                    .map(|e| {
                        Ok(CuratedEntry {
                            item: parse_uri(&e.item)?,
                            comment: e.comment.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, RuleViolation>>()?;
                let issue = Issue {
                    issue_id: p.issue.clone(),
                    journal_owner: p.owner.clone(),
                    title: p.title.clone(),
                    editorial: p.editorial.clone(),
                    entries,
                    released_at: seq,
                };
                model::check_issue(self, &issue)?;
                self.journals
                    .get_mut(&issue.journal_owner)
                    .expect("every registered scholar has a journal")
                    .issues
                    .push(issue.issue_id.clone());
                self.issues.insert(issue.issue_id.clone(), issue);
            }
            EventPayload::SubscriptionChanged(p) => {
                model::check_subscription(self, &p.subscriber, &p.journal_owner)?;
                let journal = self
                    .journals
                    .get_mut(&p.journal_owner)
                    .expect("every registered scholar has a journal");
                if p.subscribed {
                    journal.subscribers.insert(p.subscriber.clone());
                } else {
                    journal.subscribers.remove(&p.subscriber);
                }
            }
        }
        self.last_seq = seq;
        Ok(())
    }

    /// Consumes a sequence number without applying anything. Used when a
    /// permissively loaded log skipped an event of unknown kind.
    pub fn skip(&mut self, seq: SeqNo) -> Result<(), RuleViolation> {
        let expected = self.last_seq + 1;
        if seq != expected {
            return Err(RuleViolation::SequenceGap {
                expected,
                found: seq,
            });
        }
        self.last_seq = seq;
        Ok(())
    }

    /// Canonical byte serialization; the input to [`EngineState::digest`].
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("engine state always serializes")
    }

    pub fn digest(&self) -> StateDigest {
        StateDigest(hex::encode(Sha256::digest(self.canonical_bytes())))
    }
}

/// Functional append: returns the successor state, leaving `state` as is.
pub fn append(state: &EngineState, event: &Event) -> Result<EngineState, RuleViolation> {
    let mut next = state.clone();
    next.apply(event)?;
    Ok(next)
}

pub fn replay(events: &[Event]) -> Result<EngineState, ReplayError> {
    replay_with_config(events, ProtocolConfig::default())
}

pub fn replay_with_config(
    events: &[Event],
    config: ProtocolConfig,
) -> Result<EngineState, ReplayError> {
    let mut state = EngineState::with_config(config);
    for event in events {
        state.apply(event).map_err(|violation| ReplayError {
            seq: event.seq,
            violation,
        })?;
    }
    Ok(state)
}

/// Replays a permissively loaded log, stepping over skipped sequence numbers.
pub fn replay_loaded(log: &LoadedLog, config: ProtocolConfig) -> Result<EngineState, ReplayError> {
    let mut state = EngineState::with_config(config);
    let mut skipped = log.skipped.iter().map(|s| s.seq).peekable();
    for event in &log.events {
        while let Some(seq) = skipped.next_if(|&s| s < event.seq) {
            state
                .skip(seq)
                .map_err(|violation| ReplayError { seq, violation })?;
        }
        state.apply(event).map_err(|violation| ReplayError {
            seq: event.seq,
            violation,
        })?;
    }
    for seq in skipped {
        state
            .skip(seq)
            .map_err(|violation| ReplayError { seq, violation })?;
    }
    Ok(state)
}

pub fn digest(state: &EngineState) -> StateDigest {
    state.digest()
}
