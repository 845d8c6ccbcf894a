use serde::{Deserialize, Serialize};

use crate::ids::{ArticleId, IssueId, ReviewId, ScholarId};
use crate::model::{SeqNo, ValidityChoice, VoteSign};

/// One atomic protocol action, as persisted in the log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub seq: SeqNo,
    /// ISO-8601 UTC wall-clock time. Informational only; `seq` orders events.
    pub at: String,
    pub payload: EventPayload,
}

impl Event {
    pub fn new(seq: SeqNo, at: impl Into<String>, payload: impl Into<EventPayload>) -> Self {
        Self {
            seq,
            at: at.into(),
            payload: payload.into(),
        }
    }

    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    ScholarRegistered,
    ArticleSubmitted,
    ArticleRevised,
    ReviewPosted,
    ReviewVoteCast,
    ValidityVoteCast,
    PriorityToggled,
    IssueReleased,
    SubscriptionChanged,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::ScholarRegistered,
        EventKind::ArticleSubmitted,
        EventKind::ArticleRevised,
        EventKind::ReviewPosted,
        EventKind::ReviewVoteCast,
        EventKind::ValidityVoteCast,
        EventKind::PriorityToggled,
        EventKind::IssueReleased,
        EventKind::SubscriptionChanged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ScholarRegistered => "ScholarRegistered",
            EventKind::ArticleSubmitted => "ArticleSubmitted",
            EventKind::ArticleRevised => "ArticleRevised",
            EventKind::ReviewPosted => "ReviewPosted",
            EventKind::ReviewVoteCast => "ReviewVoteCast",
            EventKind::ValidityVoteCast => "ValidityVoteCast",
            EventKind::PriorityToggled => "PriorityToggled",
            EventKind::IssueReleased => "IssueReleased",
            EventKind::SubscriptionChanged => "SubscriptionChanged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScholarRegistered {
    pub scholar: ScholarId,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleSubmitted {
    pub article: ArticleId,
    pub uri: String,
    pub authors: Vec<ScholarId>,
    pub content_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleRevised {
    pub article: ArticleId,
    pub version: u32,
    pub content_digest: String,
    pub acknowledged_reviews: Vec<ReviewId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewPosted {
    pub review: ReviewId,
    pub article: ArticleId,
    pub target_version: u32,
    pub reviewer: ScholarId,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewVoteCast {
    pub voter: ScholarId,
    pub review: ReviewId,
    pub sign: VoteSign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidityVoteCast {
    pub voter: ScholarId,
    pub article: ArticleId,
    pub choice: ValidityChoice,
    pub substantiation: Option<ReviewId>,
    pub version_seen: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityToggled {
    pub scholar: ScholarId,
    pub item: String,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryPayload {
    pub item: String,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueReleased {
    pub issue: IssueId,
    pub owner: ScholarId,
    pub title: String,
    pub editorial: String,
    pub entries: Vec<EntryPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubscriptionChanged {
    pub subscriber: ScholarId,
    pub journal_owner: ScholarId,
    pub subscribed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventPayload {
    ScholarRegistered(ScholarRegistered),
    ArticleSubmitted(ArticleSubmitted),
    ArticleRevised(ArticleRevised),
    ReviewPosted(ReviewPosted),
    ReviewVoteCast(ReviewVoteCast),
    ValidityVoteCast(ValidityVoteCast),
    PriorityToggled(PriorityToggled),
    IssueReleased(IssueReleased),
    SubscriptionChanged(SubscriptionChanged),
}

macro_rules! payload_from {
    ($($variant:ident),*) => {
        $(impl From<$variant> for EventPayload {
            fn from(p: $variant) -> Self {
                EventPayload::$variant(p)
            }
        })*

        impl EventPayload {
            pub fn kind(&self) -> EventKind {
                match self {
                    $(EventPayload::$variant(_) => EventKind::$variant,)*
                }
            }

            pub(crate) fn to_json(&self) -> serde_json::Value {
                let value = match self {
                    $(EventPayload::$variant(p) => serde_json::to_value(p),)*
                };
                value.expect("payload structs always serialize")
            }

            pub(crate) fn from_json(
                kind: EventKind,
                value: serde_json::Value,
            ) -> Result<Self, serde_json::Error> {
                Ok(match kind {
                    $(EventKind::$variant => EventPayload::$variant(serde_json::from_value(value)?),)*
                })
            }
        }
    };
}

payload_from!(
    ScholarRegistered,
    ArticleSubmitted,
    ArticleRevised,
    ReviewPosted,
    ReviewVoteCast,
    ValidityVoteCast,
    PriorityToggled,
    IssueReleased,
    SubscriptionChanged
);
