//! Log construction helpers and the canonical fixture logs shipped under
//! `fixtures/`.

use chrono::{DateTime, Duration, SecondsFormat, Utc};

use crate::ledger::{
    ArticleRevised, ArticleSubmitted, EntryPayload, Event, EventPayload, IssueReleased,
    PriorityToggled, ReviewPosted, ReviewVoteCast, ScholarRegistered, SubscriptionChanged,
    ValidityVoteCast,
};
use crate::model::{SeqNo, ValidityChoice, VoteSign};

pub const ARTICLE_URI_BASE: &str = "https://sjs.example.org/articles/";

pub fn article_uri(article_id: &str) -> String {
    format!("{ARTICLE_URI_BASE}{article_id}")
}

/// Deterministic wall-clock label for `seq`: one minute per event.
pub fn timestamp_for(seq: SeqNo) -> String {
    let base = DateTime::<Utc>::from_timestamp(1_704_067_200, 0).expect("valid epoch"); // 2024-01-01
    (base + Duration::minutes(seq as i64)).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Appends events with consecutive `seq` numbers. Performs no validation.
#[derive(Debug, Clone, Default)]
pub struct LogBuilder {
    events: Vec<Event>,
}

impl LogBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn next_seq(&self) -> SeqNo {
        self.events.len() as SeqNo + 1
    }

    pub fn push(&mut self, payload: impl Into<EventPayload>) -> &mut Self {
        let seq = self.next_seq();
        self.events
            .push(Event::new(seq, timestamp_for(seq), payload));
        self
    }

    pub fn register(&mut self, scholar: &str) -> &mut Self {
        self.push(ScholarRegistered {
            scholar: scholar.into(),
            display_name: format!("Scholar {scholar}"),
        })
    }

    /// Submits `article` hosted at [`article_uri`].
    pub fn submit(&mut self, article: &str, authors: &[&str]) -> &mut Self {
        self.push(ArticleSubmitted {
            article: article.into(),
            uri: article_uri(article),
            authors: authors.iter().map(|&a| a.into()).collect(),
            content_digest: format!("{article}-v1"),
        })
    }

    pub fn revise(&mut self, article: &str, version: u32, acknowledged: &[&str]) -> &mut Self {
        self.push(ArticleRevised {
            article: article.into(),
            version,
            content_digest: format!("{article}-v{version}"),
            acknowledged_reviews: acknowledged.iter().map(|&r| r.into()).collect(),
        })
    }

    pub fn review(
        &mut self,
        review: &str,
        article: &str,
        version: u32,
        reviewer: &str,
    ) -> &mut Self {
        self.push(ReviewPosted {
            review: review.into(),
            article: article.into(),
            target_version: version,
            reviewer: reviewer.into(),
            body: format!("Review {review} of {article} v{version} by {reviewer}."),
        })
    }

    pub fn review_vote(&mut self, voter: &str, review: &str, sign: VoteSign) -> &mut Self {
        self.push(ReviewVoteCast {
            voter: voter.into(),
            review: review.into(),
            sign,
        })
    }

    pub fn reached(&mut self, voter: &str, article: &str, version: u32) -> &mut Self {
        self.push(ValidityVoteCast {
            voter: voter.into(),
            article: article.into(),
            choice: ValidityChoice::ReachedStandards,
            substantiation: None,
            version_seen: version,
        })
    }

    pub fn needs(&mut self, voter: &str, article: &str, version: u32, review: &str) -> &mut Self {
        self.push(ValidityVoteCast {
            voter: voter.into(),
            article: article.into(),
            choice: ValidityChoice::NeedsRevisions,
            substantiation: Some(review.into()),
            version_seen: version,
        })
    }

    pub fn mark(&mut self, scholar: &str, item: &str, active: bool) -> &mut Self {
        self.push(PriorityToggled {
            scholar: scholar.into(),
            item: item.into(),
            active,
        })
    }

    pub fn issue(&mut self, owner: &str, issue: &str, items: &[&str]) -> &mut Self {
        self.push(IssueReleased {
            issue: issue.into(),
            owner: owner.into(),
            title: format!("Issue {issue}"),
            editorial: format!("Editorial for {issue} by {owner}."),
            entries: items
                .iter()
                .map(|&item| EntryPayload {
                    item: item.into(),
                    comment: None,
                })
                .collect(),
        })
    }

    pub fn subscribe(&mut self, subscriber: &str, owner: &str, subscribed: bool) -> &mut Self {
        self.push(SubscriptionChanged {
            subscriber: subscriber.into(),
            journal_owner: owner.into(),
            subscribed,
        })
    }
}

/// A 40-event log touching every event kind.
pub fn golden_log() -> Vec<Event> {
    let a01 = article_uri("a01");
    let a02 = article_uri("a02");
    let a03 = article_uri("a03");
    let a04 = article_uri("a04");
    let mut b = LogBuilder::new();
    for s in ["s01", "s02", "s03", "s04", "s05", "s06"] {
        b.register(s);
    }
    b.submit("a01", &["s01", "s02"])
        .submit("a02", &["s03"])
        .submit("a03", &["s04"])
        .review("r01", "a01", 1, "s05")
        .review("r02", "a01", 1, "s06")
        .review_vote("s03", "r01", VoteSign::Up)
        .review_vote("s04", "r01", VoteSign::Down)
        .needs("s03", "a01", 1, "r01")
        .needs("s05", "a01", 1, "r01")
        .reached("s06", "a01", 1)
        .revise("a01", 2, &["r01", "r02"])
        .review_vote("s04", "r01", VoteSign::Up)
        .reached("s04", "a01", 2)
        .reached("s03", "a01", 2)
        .review("r03", "a02", 1, "s02")
        .review_vote("s01", "r03", VoteSign::Up)
        .needs("s01", "a02", 1, "r03")
        .mark("s02", &a02, true)
        .mark("s03", &a02, true)
        .mark("s02", &a02, false)
        .mark("s05", "https://example.com/external/paper", true)
        .issue(
            "s06",
            "i01",
            &[&a01, &a02, &a03, "https://example.com/external/1"],
        )
        .issue(
            "s05",
            "i02",
            &[
                &a01,
                &a02,
                "https://example.com/external/2",
                "https://example.com/external/3",
            ],
        )
        .issue(
            "s06",
            "i03",
            &[
                &a01,
                "https://example.com/external/4",
                "https://example.com/external/5",
                "https://example.com/external/6",
            ],
        )
        .subscribe("s02", "s06", true)
        .subscribe("s03", "s06", true)
        .subscribe("s03", "s06", false)
        .submit("a04", &["s04"])
        .review("r04", "a04", 1, "s05")
        .review_vote("s06", "r04", VoteSign::Up)
        .needs("s06", "a04", 1, "r04")
        .revise("a02", 2, &["r03"])
        .issue("s01", "i04", &[&a01, &a02, &a03, &a04])
        .reached("s02", "a03", 1);
    b.into_events()
}

/// The golden log with seq 7 replaced by a submission naming an
/// unregistered author.
pub fn golden_corrupt_seq7() -> Vec<Event> {
    let mut events = golden_log();
    events[6].payload = EventPayload::ArticleSubmitted(ArticleSubmitted {
        article: "a01".into(),
        uri: article_uri("a01"),
        authors: vec!["s99".into()],
        content_digest: "a01-v1".into(),
    });
    events
}

pub fn clique_member(i: usize) -> String {
    format!("c{i:02}")
}

/// `size` scholars who each author enough articles to fill an issue, then
/// each release one issue curating every clique article, own ones included.
/// Nobody outside the clique curates anything.
pub fn clique_log(size: usize, min_issue_size: usize) -> Vec<Event> {
    let per_member = min_issue_size.div_ceil(size).max(1);
    let mut b = LogBuilder::new();
    let members: Vec<String> = (0..size).map(clique_member).collect();
    for m in &members {
        b.register(m);
    }
    let mut uris = Vec::new();
    for m in &members {
        for k in 0..per_member {
            let article = format!("{m}-a{k}");
            uris.push(article_uri(&article));
            b.submit(&article, &[m]);
        }
    }
    let items: Vec<&str> = uris.iter().map(String::as_str).collect();
    for m in &members {
        b.issue(m, &format!("{m}-i0"), &items);
    }
    b.into_events()
}

/// Two scholars who each curate only the other's four articles.
pub fn dyad_log() -> Vec<Event> {
    let mut b = LogBuilder::new();
    b.register("d1").register("d2");
    for owner in ["d1", "d2"] {
        for k in 0..4 {
            b.submit(&format!("{owner}-a{k}"), &[owner]);
        }
    }
    let d2_items: Vec<String> = (0..4).map(|k| article_uri(&format!("d2-a{k}"))).collect();
    let d1_items: Vec<String> = (0..4).map(|k| article_uri(&format!("d1-a{k}"))).collect();
    b.issue(
        "d1",
        "d1-i0",
        &d2_items.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    b.issue(
        "d2",
        "d2-i0",
        &d1_items.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    b.into_events()
}

/// A dyad that also curates ten unrelated items each: one reciprocal act
/// out of eleven curation acts per direction.
pub fn diluted_dyad_log() -> Vec<Event> {
    let mut b = LogBuilder::new();
    b.register("d1").register("d2");
    b.submit("d1-a0", &["d1"]).submit("d2-a0", &["d2"]);
    for (owner, other) in [("d1", "d2"), ("d2", "d1")] {
        let mut items = vec![article_uri(&format!("{other}-a0"))];
        items.extend((0..10).map(|k| format!("https://elsewhere.example.net/{owner}/{k}")));
        b.issue(
            owner,
            &format!("{owner}-i0"),
            &items.iter().map(String::as_str).collect::<Vec<_>>(),
        );
    }
    b.into_events()
}

/// `a` curates four `b`-authored articles; `b` curates only external items.
pub fn fan_log() -> Vec<Event> {
    let mut b = LogBuilder::new();
    b.register("f1").register("f2");
    for k in 0..4 {
        b.submit(&format!("f2-a{k}"), &["f2"]);
    }
    let items: Vec<String> = (0..4).map(|k| article_uri(&format!("f2-a{k}"))).collect();
    b.issue(
        "f1",
        "f1-i0",
        &items.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    let external: Vec<String> = (0..4)
        .map(|k| format!("https://elsewhere.example.net/{k}"))
        .collect();
    b.issue(
        "f2",
        "f2-i0",
        &external.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    b.into_events()
}

/// Two disjoint triangles; each member curates both peers' two articles.
pub fn twin_triangles_log() -> Vec<Event> {
    let groups = [["t1", "t2", "t3"], ["u1", "u2", "u3"]];
    let mut b = LogBuilder::new();
    for g in &groups {
        for m in g {
            b.register(m);
        }
    }
    for g in &groups {
        for m in g {
            b.submit(&format!("{m}-a0"), &[m])
                .submit(&format!("{m}-a1"), &[m]);
        }
    }
    for g in &groups {
        for m in g {
            let items: Vec<String> = g
                .iter()
                .filter(|p| *p != m)
                .flat_map(|p| {
                    [
                        article_uri(&format!("{p}-a0")),
                        article_uri(&format!("{p}-a1")),
                    ]
                })
                .collect();
            b.issue(
                m,
                &format!("{m}-i0"),
                &items.iter().map(String::as_str).collect::<Vec<_>>(),
            );
        }
    }
    b.into_events()
}

/// Every fixture written to disk, by file stem.
pub fn all() -> Vec<(&'static str, Vec<Event>)> {
    vec![
        ("golden", golden_log()),
        ("golden_corrupt_seq7", golden_corrupt_seq7()),
        ("clique5", clique_log(5, crate::model::MIN_ISSUE_SIZE)),
        ("dyad", dyad_log()),
        ("diluted_dyad", diluted_dyad_log()),
        ("fan", fan_log()),
        ("twin_triangles", twin_triangles_log()),
    ]
}
