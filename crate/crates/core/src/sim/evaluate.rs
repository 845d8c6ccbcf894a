use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::config::StrategyKind;
use super::stats::spearman;
use crate::anomaly::{anomaly_report, DetectorParams};
use crate::ids::{ArticleId, ScholarId};
use crate::ledger::{replay_with_config, Event, ProtocolConfig, ReplayError, StateDigest};
use crate::metrics::{validity_tally, CurationIndex};

/// Minimum validity voters for an article to enter the validity correlation.
pub const MIN_VALIDITY_VOTERS: u64 = 5;

/// Simulator-only labels that never enter the log.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroundTruth {
    pub min_issue_size: usize,
    pub strategies: BTreeMap<ScholarId, StrategyKind>,
    pub cliques: Vec<Vec<ScholarId>>,
    pub quality: BTreeMap<ArticleId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueInflation {
    pub members: Vec<ScholarId>,
    pub articles: usize,
    pub mean_importance: f64,
    /// Mean importance of honest articles in the same quality deciles.
    pub matched_honest_importance: f64,
    /// `None` when the matched honest mean is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub flagged_groups: usize,
    pub flagged_pairs: usize,
    pub flagged_scholars: usize,
    pub colluders: usize,
    pub true_positives: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub articles: usize,
    pub spearman_importance: Option<f64>,
    /// Articles with at least [`MIN_VALIDITY_VOTERS`] voters.
    pub validity_sample: usize,
    pub spearman_validity: Option<f64>,
    pub clique_inflation: Vec<CliqueInflation>,
    pub detection: DetectionOutcome,
    pub event_counts: BTreeMap<String, usize>,
    pub dropped_intentions: u64,
    pub digest: StateDigest,
}

impl ScenarioReport {
    /// Compact JSON with sorted keys.
    pub fn to_json(&self) -> String {
        serde_json::to_value(self)
            .expect("report always serializes")
            .to_string()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluateError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Detector(#[from] crate::anomaly::AnomalyError),
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Scores a simulated log against its ground truth. The log is replayed
/// from scratch, so the report only depends on `log`, `truth` and `params`.
pub fn evaluate(
    log: &[Event],
    truth: &GroundTruth,
    params: &DetectorParams,
) -> Result<ScenarioReport, EvaluateError> {
    let state = replay_with_config(
        log,
        ProtocolConfig {
            min_issue_size: truth.min_issue_size,
        },
    )?;

    struct Row<'a> {
        author: &'a ScholarId,
        quality: f64,
        importance: f64,
    }
    let index = CurationIndex::build(&state);
    let mut rows = Vec::new();
    let mut validity = (Vec::new(), Vec::new());
    for (id, article) in state.articles() {
        let Some(&quality) = truth.quality.get(id) else {
            continue;
        };
        let imp = index.importance(&state, &article.canonical_uri).count as f64;
        rows.push(Row {
            author: article
                .authors
                .iter()
                .next()
                .expect("articles have authors"),
            quality,
            importance: imp,
        });
        let tally = validity_tally(&state, id).expect("article exists");
        if tally.voter_count >= MIN_VALIDITY_VOTERS {
            let f = tally.fraction.expect("voters present");
            validity.0.push(quality);
            validity.1.push(*f.numer() as f64 / *f.denom() as f64);
        }
    }

    let qualities: Vec<f64> = rows.iter().map(|r| r.quality).collect();
    let importances: Vec<f64> = rows.iter().map(|r| r.importance).collect();

    // Quality deciles by rank.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].quality.total_cmp(&rows[b].quality).then(a.cmp(&b)));
    let mut decile = vec![0usize; rows.len()];
    for (rank, &i) in order.iter().enumerate() {
        decile[i] = rank * 10 / rows.len();
    }
    let is_honest = |s: &ScholarId| truth.strategies.get(s) == Some(&StrategyKind::Honest);
    let mut honest_by_decile = [(0.0, 0usize); 10];
    for (i, row) in rows.iter().enumerate() {
        if is_honest(row.author) {
            honest_by_decile[decile[i]].0 += row.importance;
            honest_by_decile[decile[i]].1 += 1;
        }
    }
    let honest_mean = |d: usize| {
        let (s, n) = honest_by_decile[d];
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    };

    let clique_inflation = truth
        .cliques
        .iter()
        .map(|members| {
            let idx: Vec<usize> = (0..rows.len())
                .filter(|&i| members.contains(rows[i].author))
                .collect();
            let mean_importance = mean(idx.iter().map(|&i| rows[i].importance));
            let matched = mean(idx.iter().map(|&i| honest_mean(decile[i])));
            CliqueInflation {
                members: members.clone(),
                articles: idx.len(),
                mean_importance,
                matched_honest_importance: matched,
                ratio: (matched > 0.0).then(|| mean_importance / matched),
            }
        })
        .collect();

    let report = anomaly_report(&state, params)?;
    let flagged = report.flagged_scholars();
    let colluders: BTreeSet<&ScholarId> = truth
        .strategies
        .iter()
        .filter(|(_, k)| **k == StrategyKind::Colluder)
        .map(|(s, _)| s)
        .collect();
    let true_positives = flagged.intersection(&colluders).count();

    let mut event_counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in log {
        *event_counts
            .entry(e.kind().as_str().to_string())
            .or_default() += 1;
    }

    Ok(ScenarioReport {
        articles: rows.len(),
        spearman_importance: spearman(&qualities, &importances),
        validity_sample: validity.0.len(),
        spearman_validity: spearman(&validity.0, &validity.1),
        clique_inflation,
        detection: DetectionOutcome {
            flagged_groups: report.groups.len(),
            flagged_pairs: report.pairs.len(),
            flagged_scholars: flagged.len(),
            colluders: colluders.len(),
            true_positives,
            precision: ratio(true_positives, flagged.len()),
            recall: ratio(true_positives, colluders.len()),
        },
        event_counts,
        dropped_intentions: 0,
        digest: state.digest(),
    })
}
