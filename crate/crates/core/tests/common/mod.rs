//! Shared test support: a random valid-log generator and a brute-force
//! oracle that recomputes metrics by scanning raw events.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfjournal::fixtures::{article_uri, timestamp_for};
use selfjournal::ledger::{
    ArticleRevised, ArticleSubmitted, EngineState, EntryPayload, Event, EventPayload,
    IssueReleased, PriorityToggled, ReviewPosted, ReviewVoteCast, ScholarRegistered,
    SubscriptionChanged, ValidityVoteCast,
};
use selfjournal::metrics::{
    acknowledged_reviewers, importance, item_metrics, priority, review_score, validity_tally,
    CurationIndex, ItemFilter,
};
use selfjournal::model::{ValidityChoice, VoteSign};
use selfjournal::ItemUri;

/// External items in several spellings of the same canonical URI.
fn external_item(rng: &mut ChaCha8Rng) -> String {
    let k = rng.random_range(0..6);
    match rng.random_range(0..3) {
        0 => format!("https://ext.example.org/p{k}"),
        1 => format!("https://ext.example.org/p{k}/"),
        _ => format!("HTTPS://Ext.Example.ORG/p{k}"),
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

/// Proposes one random action; many are invalid on purpose.
fn candidate(rng: &mut ChaCha8Rng, state: &EngineState, counter: usize) -> Option<EventPayload> {
    let scholars: Vec<String> = state.scholars().keys().map(|s| s.to_string()).collect();
    let articles: Vec<String> = state.articles().keys().map(|a| a.to_string()).collect();
    let reviews: Vec<String> = state.reviews().keys().map(|r| r.to_string()).collect();
    let roll = rng.random_range(0..100);
    if scholars.len() < 2 || roll < 8 {
        let id = if rng.random_bool(0.1) && !scholars.is_empty() {
            pick(rng, &scholars)?.clone()
        } else {
            format!("s{counter}")
        };
        return Some(
            ScholarRegistered {
                scholar: id.as_str().into(),
                display_name: if rng.random_bool(0.03) {
                    " ".into()
                } else {
                    format!("Scholar {id}")
                },
            }
            .into(),
        );
    }
    let scholar = pick(rng, &scholars)?.clone();
    if articles.is_empty() || roll < 20 {
        let mut authors = vec![scholar.as_str().into()];
        if rng.random_bool(0.3) {
            authors.push(pick(rng, &scholars)?.as_str().into());
        }
        if rng.random_bool(0.05) {
            authors.push("ghost".into());
        }
        let id = format!("a{counter}");
        return Some(
            ArticleSubmitted {
                uri: article_uri(&id),
                article: id.as_str().into(),
                authors,
                content_digest: format!("{id}-v1"),
            }
            .into(),
        );
    }
    let article_id = pick(rng, &articles)?.clone();
    let article = state.article(&article_id.as_str().into())?;
    let current = article.current_version();
    let version_guess = |rng: &mut ChaCha8Rng| -> u32 {
        if rng.random_bool(0.05) {
            current + 1
        } else {
            rng.random_range(1..=current)
        }
    };
    let on_article: Vec<String> = state
        .reviews()
        .values()
        .filter(|r| r.article_id == article.article_id)
        .map(|r| r.review_id.to_string())
        .collect();
    Some(match roll {
        20..=27 => {
            let mut acks: Vec<selfjournal::ReviewId> = on_article
                .iter()
                .filter(|_| rng.random_bool(0.6))
                .map(|r| r.as_str().into())
                .collect();
            if rng.random_bool(0.05) {
                if let Some(r) = pick(rng, &reviews) {
                    acks.push(r.as_str().into());
                }
            }
            let version = if rng.random_bool(0.05) {
                current + 2
            } else {
                current + 1
            };
            ArticleRevised {
                article: article.article_id.clone(),
                version,
                content_digest: format!("{article_id}-v{version}"),
                acknowledged_reviews: acks,
            }
            .into()
        }
        28..=42 => ReviewPosted {
            review: format!("r{counter}").as_str().into(),
            article: article.article_id.clone(),
            target_version: version_guess(rng),
            reviewer: scholar.as_str().into(),
            body: if rng.random_bool(0.03) {
                String::new()
            } else {
                "Comments.".into()
            },
        }
        .into(),
        43..=57 => {
            let review = if on_article.is_empty() || rng.random_bool(0.3) {
                pick(rng, &reviews)
                    .cloned()
                    .unwrap_or_else(|| "r-none".into())
            } else {
                pick(rng, &on_article)?.clone()
            };
            ReviewVoteCast {
                voter: scholar.as_str().into(),
                review: review.as_str().into(),
                sign: if rng.random_bool(0.7) {
                    VoteSign::Up
                } else {
                    VoteSign::Down
                },
            }
            .into()
        }
        58..=77 => {
            let needs = rng.random_bool(0.4);
            let substantiation = match (needs, rng.random_bool(0.9)) {
                (true, true) | (false, false) => {
                    let pool = if on_article.is_empty() {
                        &reviews
                    } else {
                        &on_article
                    };
                    pick(rng, pool).map(|r| r.as_str().into())
                }
                _ => None,
            };
            ValidityVoteCast {
                voter: scholar.as_str().into(),
                article: article.article_id.clone(),
                choice: if needs {
                    ValidityChoice::NeedsRevisions
                } else {
                    ValidityChoice::ReachedStandards
                },
                substantiation,
                version_seen: version_guess(rng),
            }
            .into()
        }
        78..=87 => {
            let item = if rng.random_bool(0.6) {
                article_uri(&article_id)
            } else {
                external_item(rng)
            };
            let current = state
                .priority_mark(
                    &selfjournal::ItemUri::parse(&item).ok()?,
                    &scholar.as_str().into(),
                )
                .is_some_and(|m| m.active);
            PriorityToggled {
                scholar: scholar.as_str().into(),
                item,
                active: if rng.random_bool(0.9) {
                    !current
                } else {
                    current
                },
            }
            .into()
        }
        88..=95 => {
            let n = rng.random_range(3..=6);
            let mut entries = Vec::new();
            for _ in 0..n {
                let item = if rng.random_bool(0.6) {
                    article_uri(pick(rng, &articles)?)
                } else {
                    external_item(rng)
                };
                entries.push(EntryPayload {
                    item,
                    comment: rng.random_bool(0.2).then(|| "worth reading".to_string()),
                });
            }
            IssueReleased {
                issue: format!("i{counter}").as_str().into(),
                owner: scholar.as_str().into(),
                title: format!("Issue {counter}"),
                editorial: "Picks.".into(),
                entries,
            }
            .into()
        }
        _ => SubscriptionChanged {
            subscriber: scholar.as_str().into(),
            journal_owner: pick(rng, &scholars)?.as_str().into(),
            subscribed: rng.random_bool(0.8),
        }
        .into(),
    })
}

/// A valid log of at most `max_events` events built from random
/// proposals that the engine accepted.
pub fn fuzz_log(seed: u64, max_events: usize) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.random_range(1..=max_events);
    let mut state = EngineState::new();
    let mut events = Vec::new();
    let mut attempts = 0;
    while events.len() < target && attempts < target * 6 {
        attempts += 1;
        let Some(payload) = candidate(&mut rng, &state, attempts) else {
            continue;
        };
        let seq = events.len() as u64 + 1;
        let event = Event::new(seq, timestamp_for(seq), payload);
        if state.apply(&event).is_ok() {
            events.push(event);
        }
    }
    events
}

/// Lowercase scheme and host, drop a trailing slash. Enough for the URI
/// spellings the generator and fixtures produce.
pub fn norm(uri: &str) -> String {
    let (scheme, rest) = uri.split_once("://").expect("absolute uri");
    let (host, path) = rest.split_once('/').map_or((rest, ""), |(h, p)| (h, p));
    let path = path.trim_end_matches('/');
    if path.is_empty() {
        format!("{}://{}", scheme.to_lowercase(), host.to_lowercase())
    } else {
        format!(
            "{}://{}/{}",
            scheme.to_lowercase(),
            host.to_lowercase(),
            path
        )
    }
}

/// Metrics recomputed by linear scans over raw events.
pub mod oracle {
    use super::*;

    /// (voters, validated) over each voter's latest vote.
    pub fn validity(events: &[Event], article: &str) -> (u64, u64) {
        let mut latest: BTreeMap<String, ValidityChoice> = BTreeMap::new();
        for e in events {
            if let EventPayload::ValidityVoteCast(v) = &e.payload {
                if v.article.as_str() == article {
                    latest.insert(v.voter.to_string(), v.choice);
                }
            }
        }
        let validated = latest
            .values()
            .filter(|c| **c == ValidityChoice::ReachedStandards)
            .count();
        (latest.len() as u64, validated as u64)
    }

    pub fn authors_of(events: &[Event], item: &str) -> BTreeSet<String> {
        for e in events {
            if let EventPayload::ArticleSubmitted(a) = &e.payload {
                if norm(&a.uri) == norm(item) {
                    return a.authors.iter().map(|s| s.to_string()).collect();
                }
            }
        }
        BTreeSet::new()
    }

    pub fn importance(events: &[Event], item: &str) -> usize {
        let authors = authors_of(events, item);
        let mut curators = BTreeSet::new();
        for e in events {
            if let EventPayload::IssueReleased(i) = &e.payload {
                if i.entries.iter().any(|en| norm(&en.item) == norm(item))
                    && !authors.contains(i.owner.as_str())
                {
                    curators.insert(i.owner.to_string());
                }
            }
        }
        curators.len()
    }

    pub fn priority(events: &[Event], item: &str) -> usize {
        let mut latest: BTreeMap<String, bool> = BTreeMap::new();
        for e in events {
            if let EventPayload::PriorityToggled(p) = &e.payload {
                if norm(&p.item) == norm(item) {
                    latest.insert(p.scholar.to_string(), p.active);
                }
            }
        }
        latest.values().filter(|a| **a).count()
    }

    /// (up, down) over each voter's latest vote.
    pub fn review_score(events: &[Event], review: &str) -> (u64, u64) {
        let mut latest: BTreeMap<String, VoteSign> = BTreeMap::new();
        for e in events {
            if let EventPayload::ReviewVoteCast(v) = &e.payload {
                if v.review.as_str() == review {
                    latest.insert(v.voter.to_string(), v.sign);
                }
            }
        }
        let up = latest.values().filter(|s| **s == VoteSign::Up).count() as u64;
        (up, latest.len() as u64 - up)
    }

    /// Reviewers acknowledged by any revision up to `version`.
    pub fn acknowledged(events: &[Event], article: &str, version: u32) -> BTreeSet<String> {
        let mut reviewer: BTreeMap<String, String> = BTreeMap::new();
        let mut out = BTreeSet::new();
        for e in events {
            match &e.payload {
                EventPayload::ReviewPosted(r) => {
                    reviewer.insert(r.review.to_string(), r.reviewer.to_string());
                }
                EventPayload::ArticleRevised(r)
                    if r.article.as_str() == article && r.version <= version =>
                {
                    for ack in &r.acknowledged_reviews {
                        out.insert(reviewer[ack.as_str()].clone());
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Every item mentioned anywhere, normalized.
    pub fn items(events: &[Event]) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in events {
            match &e.payload {
                EventPayload::ArticleSubmitted(a) => {
                    out.insert(norm(&a.uri));
                }
                EventPayload::IssueReleased(i) => {
                    out.extend(i.entries.iter().map(|en| norm(&en.item)))
                }
                EventPayload::PriorityToggled(p) => {
                    out.insert(norm(&p.item));
                }
                _ => {}
            }
        }
        out
    }
}

/// Every discrepancy between the engine's metrics and the oracle.
pub fn discrepancies(events: &[Event]) -> Vec<String> {
    let state = selfjournal::ledger::replay(events).expect("generated logs are valid");
    let index = CurationIndex::build(&state);
    let mut out = Vec::new();

    for (id, article) in state.articles() {
        let t = validity_tally(&state, id).unwrap();
        let (n, validated) = oracle::validity(events, id.as_str());
        if (t.voter_count, t.validated_count) != (n, validated) {
            out.push(format!(
                "validity {id}: engine {:?} oracle {:?}",
                (t.voter_count, t.validated_count),
                (n, validated)
            ));
        }
        for v in 1..=article.current_version() {
            let engine: BTreeSet<String> = acknowledged_reviewers(&state, id, v)
                .unwrap()
                .reviewers
                .iter()
                .map(|s| s.to_string())
                .collect();
            if engine != oracle::acknowledged(events, id.as_str(), v) {
                out.push(format!("acknowledged {id} v{v}"));
            }
        }
    }
    for id in state.reviews().keys() {
        let s = review_score(&state, id).unwrap();
        if (s.up, s.down) != oracle::review_score(events, id.as_str()) {
            out.push(format!("review score {id}"));
        }
    }
    let items = oracle::items(events);
    for item in &items {
        let uri = ItemUri::parse(item).unwrap();
        let expected = oracle::importance(events, item);
        if importance(&state, &uri).count != expected
            || index.importance(&state, &uri).count != expected
        {
            out.push(format!("importance {item}"));
        }
        if priority(&state, &uri).count != oracle::priority(events, item) {
            out.push(format!("priority {item}"));
        }
    }
    let rows = item_metrics(&state, &ItemFilter::All);
    let row_items: BTreeSet<String> = rows.iter().map(|r| r.uri.to_string()).collect();
    if row_items != items {
        out.push("exported item set".into());
    }
    for row in &rows {
        let item = row.uri.as_str();
        if row.importance != oracle::importance(events, item)
            || row.priority != oracle::priority(events, item)
        {
            out.push(format!("exported row {item}"));
        }
    }
    out
}
