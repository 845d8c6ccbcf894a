use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::CurationIndex;
use crate::ids::{ArticleId, ItemUri, ScholarId};
use crate::ledger::EngineState;

/// Curation, authorship and reviewing networks with their derived views.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CurationGraph {
    /// scholar → item, weighted by the number of issues including it.
    pub curation: BTreeMap<(ScholarId, ItemUri), u32>,
    /// author → hosted article URI.
    pub authorship: BTreeSet<(ScholarId, ItemUri)>,
    /// reviewer → article, weighted by the number of reviews posted.
    pub reviewing: BTreeMap<(ScholarId, ArticleId), u32>,
    /// Unordered item pairs (a < b) weighted by the number of distinct
    /// scholars who curated both.
    pub co_curation: BTreeMap<(ItemUri, ItemUri), u32>,
    /// curator → author: distinct author-excluded items the curator
    /// included that the author wrote.
    pub cross_curation: BTreeMap<(ScholarId, ScholarId), u32>,
}

pub fn curation_graph(state: &EngineState) -> CurationGraph {
    let mut g = CurationGraph::default();

    let mut per_scholar: BTreeMap<&ScholarId, BTreeSet<&ItemUri>> = BTreeMap::new();
    for issue in state.issues().values() {
        for entry in &issue.entries {
            *g.curation
                .entry((issue.journal_owner.clone(), entry.item.clone()))
                .or_default() += 1;
            per_scholar
                .entry(&issue.journal_owner)
                .or_default()
                .insert(&entry.item);
        }
    }
    for items in per_scholar.values() {
        let items: Vec<&&ItemUri> = items.iter().collect();
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                *g.co_curation
                    .entry(((**a).clone(), (**b).clone()))
                    .or_default() += 1;
            }
        }
    }

    for article in state.articles().values() {
        for author in &article.authors {
            g.authorship
                .insert((author.clone(), article.canonical_uri.clone()));
        }
    }
    for review in state.reviews().values() {
        *g.reviewing
            .entry((review.reviewer.clone(), review.article_id.clone()))
            .or_default() += 1;
    }

    let index = CurationIndex::build(state);
    for act in index.peer_curations(state) {
        for author in act.authors.into_iter().flatten() {
            *g.cross_curation
                .entry((act.curator.clone(), author.clone()))
                .or_default() += 1;
        }
    }
    g
}

impl CurationGraph {
    pub fn is_empty(&self) -> bool {
        self.curation.is_empty()
            && self.authorship.is_empty()
            && self.reviewing.is_empty()
            && self.co_curation.is_empty()
            && self.cross_curation.is_empty()
    }

    /// Tab-separated edge list: `kind, from, to, weight`, header first.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("kind\tfrom\tto\tweight\n");
        let mut line = |kind: &str, from: &str, to: &str, w: u32| {
            writeln!(out, "{kind}\t{from}\t{to}\t{w}").expect("writing to a String");
        };
        for ((s, i), w) in &self.curation {
            line("curation", s.as_str(), i.as_str(), *w);
        }
        for (s, i) in &self.authorship {
            line("authorship", s.as_str(), i.as_str(), 1);
        }
        for ((s, a), w) in &self.reviewing {
            line("review", s.as_str(), a.as_str(), *w);
        }
        for ((a, b), w) in &self.co_curation {
            line("co_curation", a.as_str(), b.as_str(), *w);
        }
        for ((c, a), w) in &self.cross_curation {
            line("cross_curation", c.as_str(), a.as_str(), *w);
        }
        out
    }
}
