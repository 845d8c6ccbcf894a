//! Collusion detectors over the author-excluded cross-curation relation.
//!
//! Two detectors are provided:
//!
//! * **Reciprocal pairs.** For every pair of scholars who curate each
//!   other's authored items, the reciprocity share is the larger of the two
//!   fractions "acts of X directed at Y's items / all curation acts of X".
//!   A pair is flagged when both directions are non-zero and the share
//!   reaches `theta`.
//! * **Dense groups.** Density peeling on the directed graph `a → b` ("a
//!   curated at least one item b authored"). Each weakly connected
//!   component is peeled by repeatedly removing the member that directs the
//!   smallest share of its curation at the rest of the component (ties by
//!   ascending id); whenever a removal disconnects the component, the parts
//!   are peeled independently. The first set on each branch whose density
//!   reaches `delta`, whose size reaches `min_size` and whose members all
//!   direct at least `min_share` of their curation inside it is reported.
//!
//! Both detectors read the same relation as the importance metric: URIs
//! are normalized, a curator's own items never count, and repeated
//! curation of one item by one scholar counts once.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ids::{IssueId, ItemUri, ScholarId};
use crate::ledger::{EngineState, StateDigest};
use crate::metrics::CurationIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnomalyError {
    #[error("{name} must lie in {range}, got {value}")]
    InvalidThreshold {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("min_size must be at least 2, got {0}")]
    InvalidMinSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    /// Reciprocity-share threshold for pairs, in (0, 1].
    pub theta: f64,
    /// Density threshold for groups, in (0, 1].
    pub delta: f64,
    /// Smallest reportable group.
    pub min_size: usize,
    /// Share of each member's curation that must stay inside a reported
    /// group, in [0, 1].
    pub min_share: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            theta: 0.5,
            delta: 0.8,
            min_size: 3,
            min_share: 0.5,
        }
    }
}

fn check_unit(name: &'static str, value: f64, zero_ok: bool) -> Result<(), AnomalyError> {
    let lower_ok = if zero_ok { value >= 0.0 } else { value > 0.0 };
    if lower_ok && value <= 1.0 {
        Ok(())
    } else {
        Err(AnomalyError::InvalidThreshold {
            name,
            range: if zero_ok { "[0, 1]" } else { "(0, 1]" },
            value,
        })
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), AnomalyError> {
        check_unit("theta", self.theta, false)?;
        check_unit("delta", self.delta, false)?;
        check_unit("min_share", self.min_share, true)?;
        if self.min_size < 2 {
            return Err(AnomalyError::InvalidMinSize(self.min_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocityRecord {
    pub a: ScholarId,
    pub b: ScholarId,
    pub a_curates_b: u32,
    pub b_curates_a: u32,
    pub reciprocity_share: f64,
}

/// Per-curator view of the author-excluded curation relation.
struct CrossCuration {
    /// Distinct author-excluded items curated, platform-hosted or not.
    totals: BTreeMap<ScholarId, u32>,
    /// curator → author → distinct items.
    directed: BTreeMap<(ScholarId, ScholarId), u32>,
}

impl CrossCuration {
    fn build(state: &EngineState, index: &CurationIndex) -> Self {
        let mut totals: BTreeMap<ScholarId, u32> = BTreeMap::new();
        let mut directed: BTreeMap<(ScholarId, ScholarId), u32> = BTreeMap::new();
        for act in index.peer_curations(state) {
            *totals.entry(act.curator.clone()).or_default() += 1;
            for author in act.authors.into_iter().flatten() {
                *directed
                    .entry((act.curator.clone(), author.clone()))
                    .or_default() += 1;
            }
        }
        Self { totals, directed }
    }
}

/// One record per unordered pair with any cross-curation, ordered by ids.
pub fn reciprocity_records(state: &EngineState) -> Vec<ReciprocityRecord> {
    let cross = CrossCuration::build(state, &CurationIndex::build(state));
    let pairs: BTreeSet<(&ScholarId, &ScholarId)> = cross
        .directed
        .keys()
        .map(|(x, y)| if x < y { (x, y) } else { (y, x) })
        .collect();
    let share = |from: &ScholarId, n: u32| -> f64 {
        match cross.totals.get(from) {
            Some(&total) if total > 0 => f64::from(n) / f64::from(total),
            _ => 0.0,
        }
    };
    pairs
        .into_iter()
        .map(|(a, b)| {
            let ab = cross
                .directed
                .get(&(a.clone(), b.clone()))
                .copied()
                .unwrap_or(0);
            let ba = cross
                .directed
                .get(&(b.clone(), a.clone()))
                .copied()
                .unwrap_or(0);
            ReciprocityRecord {
                a: a.clone(),
                b: b.clone(),
                a_curates_b: ab,
                b_curates_a: ba,
                reciprocity_share: share(a, ab).max(share(b, ba)),
            }
        })
        .collect()
}

pub fn flag_pairs(
    records: &[ReciprocityRecord],
    theta: f64,
) -> Result<Vec<ReciprocityRecord>, AnomalyError> {
    check_unit("theta", theta, false)?;
    Ok(records
        .iter()
        .filter(|r| r.a_curates_b >= 1 && r.b_curates_a >= 1 && r.reciprocity_share >= theta)
        .cloned()
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Evidence {
    pub curator: ScholarId,
    pub item: ItemUri,
    pub issue: IssueId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedGroup {
    pub members: Vec<ScholarId>,
    pub density: f64,
    pub evidence: Vec<Evidence>,
}

/// One author-excluded curation act with the authors (as node indices) it
/// points at.
struct Act<'a> {
    item: &'a ItemUri,
    issues: &'a [IssueId],
    authors: Vec<usize>,
}

struct Peeler<'a> {
    ids: Vec<&'a ScholarId>,
    acts: Vec<Vec<Act<'a>>>,
    totals: Vec<u32>,
    out: Vec<BTreeSet<usize>>,
    inn: Vec<BTreeSet<usize>>,
    params: DetectorParams,
}

/// Exact share `inner / total`, ordered by cross-multiplication.
#[derive(Debug, Clone, Copy)]
struct Share {
    inner: u32,
    total: u32,
}

impl Share {
    fn at_least(self, threshold: f64) -> bool {
        if self.total == 0 {
            return threshold <= 0.0;
        }
        f64::from(self.inner) >= threshold * f64::from(self.total)
    }
}

impl Ord for Share {
    fn cmp(&self, other: &Self) -> Ordering {
        // A scholar with no curation acts has share 0.
        let lhs = u64::from(self.inner) * u64::from(other.total.max(1));
        let rhs = u64::from(other.inner) * u64::from(self.total.max(1));
        lhs.cmp(&rhs)
    }
}

impl PartialEq for Share {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Share {}

impl PartialOrd for Share {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Peeler<'a> {
    fn new(state: &'a EngineState, index: &'a CurationIndex, params: DetectorParams) -> Self {
        let mut nodes: BTreeSet<&'a ScholarId> = BTreeSet::new();
        let raw: Vec<_> = index.peer_curations(state).collect();
        for act in &raw {
            if let Some(authors) = act.authors {
                nodes.insert(act.curator);
                nodes.extend(authors.iter());
            }
        }
        let ids: Vec<&ScholarId> = nodes.into_iter().collect();
        let pos: BTreeMap<&ScholarId, usize> =
            ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let n = ids.len();
        let mut acts: Vec<Vec<Act>> = (0..n).map(|_| Vec::new()).collect();
        let mut totals = vec![0u32; n];
        let mut out = vec![BTreeSet::new(); n];
        let mut inn = vec![BTreeSet::new(); n];
        for act in raw {
            let Some(&c) = pos.get(act.curator) else {
                continue;
            };
            totals[c] += 1;
            let authors: Vec<usize> = act.authors.into_iter().flatten().map(|a| pos[a]).collect();
            for &a in &authors {
                out[c].insert(a);
                inn[a].insert(c);
            }
            if !authors.is_empty() {
                acts[c].push(Act {
                    item: act.item,
                    issues: act.issues,
                    authors,
                });
            }
        }
        Self {
            ids,
            acts,
            totals,
            out,
            inn,
            params,
        }
    }

    fn share(&self, v: usize, members: &[bool]) -> Share {
        let inner = self.acts[v]
            .iter()
            .filter(|act| act.authors.iter().any(|&a| members[a]))
            .count() as u32;
        Share {
            inner,
            total: self.totals[v],
        }
    }

    fn density(&self, set: &BTreeSet<usize>) -> f64 {
        let k = set.len();
        if k < 2 {
            return 0.0;
        }
        let edges: usize = set
            .iter()
            .map(|&v| self.out[v].iter().filter(|w| set.contains(w)).count())
            .sum();
        edges as f64 / (k * (k - 1)) as f64
    }

    /// Components under mutual curation: `v` and `w` are adjacent only when
    /// each curated the other. A one-way curation does not join two groups.
    fn components(&self, set: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut parts = Vec::new();
        for &start in set {
            if seen.contains(&start) {
                continue;
            }
            let mut part = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                for &w in self.out[v].intersection(&self.inn[v]) {
                    if set.contains(&w) && seen.insert(w) {
                        part.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            parts.push(part);
        }
        parts
    }

    fn qualifies(&self, set: &BTreeSet<usize>, members: &[bool]) -> Option<f64> {
        if set.len() < self.params.min_size {
            return None;
        }
        let density = self.density(set);
        if density < self.params.delta {
            return None;
        }
        set.iter()
            .all(|&v| self.share(v, members).at_least(self.params.min_share))
            .then_some(density)
    }

    fn peel(&self, component: BTreeSet<usize>, found: &mut Vec<(BTreeSet<usize>, f64)>) {
        let mut members = vec![false; self.ids.len()];
        for &v in &component {
            members[v] = true;
        }
        let mut set = component;
        let mut order: BTreeSet<(Share, usize)> =
            set.iter().map(|&v| (self.share(v, &members), v)).collect();
        let mut current: BTreeMap<usize, Share> = order.iter().map(|&(s, v)| (v, s)).collect();
        loop {
            if set.len() < self.params.min_size {
                return;
            }
            if let Some(density) = self.qualifies(&set, &members) {
                found.push((set, density));
                return;
            }
            let (_, victim) = order.pop_first().expect("set is non-empty");
            set.remove(&victim);
            members[victim] = false;
            current.remove(&victim);
            for &v in &self.inn[victim] {
                if members[v] {
                    let old = current[&v];
                    let new = self.share(v, &members);
                    if old != new {
                        order.remove(&(old, v));
                        order.insert((new, v));
                        current.insert(v, new);
                    }
                }
            }
            let parts = self.components(&set);
            if parts.len() > 1 {
                for part in parts {
                    self.peel(part, found);
                }
                return;
            }
        }
    }

    fn evidence(&self, group: &BTreeSet<usize>) -> Vec<Evidence> {
        let mut evidence = Vec::new();
        for &c in group {
            for act in &self.acts[c] {
                if act.authors.iter().any(|a| *a != c && group.contains(a)) {
                    for issue in act.issues {
                        evidence.push(Evidence {
                            curator: self.ids[c].clone(),
                            item: act.item.clone(),
                            issue: issue.clone(),
                        });
                    }
                }
            }
        }
        evidence.sort();
        evidence.dedup();
        evidence
    }
}

/// Dense cross-curation groups found by density peeling.
pub fn flag_groups(
    state: &EngineState,
    params: &DetectorParams,
) -> Result<Vec<FlaggedGroup>, AnomalyError> {
    params.validate()?;
    let index = CurationIndex::build(state);
    let peeler = Peeler::new(state, &index, *params);
    let everyone: BTreeSet<usize> = (0..peeler.ids.len()).collect();
    let mut found = Vec::new();
    for component in peeler.components(&everyone) {
        peeler.peel(component, &mut found);
    }
    let mut groups: Vec<FlaggedGroup> = found
        .into_iter()
        .map(|(set, density)| FlaggedGroup {
            members: set.iter().map(|&v| peeler.ids[v].clone()).collect(),
            density,
            evidence: peeler.evidence(&set),
        })
        .collect();
    groups.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyReport {
    pub generated_from: StateDigest,
    pub parameters: DetectorParams,
    pub pairs: Vec<ReciprocityRecord>,
    pub groups: Vec<FlaggedGroup>,
}

impl AnomalyReport {
    /// JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        serde_json::to_value(self)
            .expect("report always serializes")
            .to_string()
    }

    pub fn flagged_scholars(&self) -> BTreeSet<&ScholarId> {
        self.groups
            .iter()
            .flat_map(|g| g.members.iter())
            .chain(self.pairs.iter().flat_map(|p| [&p.a, &p.b]))
            .collect()
    }
}

pub fn anomaly_report(
    state: &EngineState,
    params: &DetectorParams,
) -> Result<AnomalyReport, AnomalyError> {
    params.validate()?;
    let pairs = flag_pairs(&reciprocity_records(state), params.theta)?;
    let groups = flag_groups(state, params)?;
    Ok(AnomalyReport {
        generated_from: state.digest(),
        parameters: *params,
        pairs,
        groups,
    })
}
