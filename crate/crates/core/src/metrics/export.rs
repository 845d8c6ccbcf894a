use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;

use super::{priority, validity_tally, CurationIndex};
use crate::ids::{ArticleId, ItemUri};
use crate::ledger::EngineState;

/// Renders `r` with four decimals, rounding half to even.
pub fn decimal_4(r: &Ratio<u64>) -> String {
    let (num, den) = (u128::from(*r.numer()), u128::from(*r.denom()));
    let scaled = num * 10_000;
    let mut q = scaled / den;
    let rem = scaled % den;
    if 2 * rem > den || (2 * rem == den && q % 2 == 1) {
        q += 1;
    }
    format!("{}.{:04}", q / 10_000, q % 10_000)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityExport {
    pub n: u64,
    pub validated: u64,
    pub fraction: Option<f64>,
}

/// One exported metric row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemMetrics {
    pub uri: ItemUri,
    pub validity: ValidityExport,
    pub importance: usize,
    pub priority: usize,
    #[serde(skip)]
    fraction_text: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ItemFilter {
    #[default]
    All,
    Item(ItemUri),
    Article(ArticleId),
}

/// Metric rows for every known item (platform articles plus anything
/// curated or marked), sorted by URI, optionally narrowed by `filter`.
pub fn item_metrics(state: &EngineState, filter: &ItemFilter) -> Vec<ItemMetrics> {
    let index = CurationIndex::build(state);
    let items: BTreeSet<ItemUri> = match filter {
        ItemFilter::All => state
            .articles()
            .values()
            .map(|a| a.canonical_uri.clone())
            .chain(index.items().cloned())
            .chain(state.priority_marks().map(|m| m.item.clone()))
            .collect(),
        ItemFilter::Item(item) => BTreeSet::from([item.clone()]),
        ItemFilter::Article(id) => state
            .article(id)
            .map(|a| a.canonical_uri.clone())
            .into_iter()
            .collect(),
    };
    items
        .into_iter()
        .map(|uri| {
            let tally = state
                .article_for_item(&uri)
                .and_then(|a| validity_tally(state, &a.article_id).ok());
            let (n, validated, fraction) = tally
                .map(|t| (t.voter_count, t.validated_count, t.fraction))
                .unwrap_or((0, 0, None));
            let fraction_text = fraction.as_ref().map(decimal_4);
            ItemMetrics {
                validity: ValidityExport {
                    n,
                    validated,
                    fraction: fraction_text
                        .as_deref()
                        .map(|s| s.parse().expect("decimal_4 yields a number")),
                },
                importance: index.importance(state, &uri).count,
                priority: priority(state, &uri).count,
                fraction_text,
                uri,
            }
        })
        .collect()
}

pub fn metrics_to_json(rows: &[ItemMetrics]) -> String {
    serde_json::to_string(rows).expect("metric rows always serialize")
}

pub const CSV_HEADER: [&str; 6] = [
    "uri",
    "validity_n",
    "validity_validated",
    "validity_fraction",
    "importance",
    "priority",
];

/// CSV with the same values as [`metrics_to_json`]; an absent fraction is
/// an empty cell.
pub fn metrics_to_csv(rows: &[ItemMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record([
            row.uri.as_str(),
            &row.validity.n.to_string(),
            &row.validity.validated.to_string(),
            row.fraction_text.as_deref().unwrap_or(""),
            &row.importance.to_string(),
            &row.priority.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_even_rounding() {
        assert_eq!(decimal_4(&Ratio::new(3, 5)), "0.6000");
        assert_eq!(decimal_4(&Ratio::new(1, 3)), "0.3333");
        assert_eq!(decimal_4(&Ratio::new(2, 3)), "0.6667");
        assert_eq!(decimal_4(&Ratio::new(1, 1)), "1.0000");
        assert_eq!(decimal_4(&Ratio::new(0, 7)), "0.0000");
        // Exact ties at the fifth decimal.
        assert_eq!(decimal_4(&Ratio::new(1, 32)), "0.0312"); // 0.03125
        assert_eq!(decimal_4(&Ratio::new(3, 32)), "0.0938"); // 0.09375
        assert_eq!(decimal_4(&Ratio::new(1, 160)), "0.0062"); // 0.00625
    }
}
