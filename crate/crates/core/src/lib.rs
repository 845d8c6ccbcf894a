//! Event-sourced engine for open peer review and self-journal curation.
//!
//! * [`model`]: domain entities and per-action protocol rules.
//! * [`ledger`]: append-only event log, replay, digests, JSON Lines format.
//! * [`metrics`]: validity, importance and priority, plus curation networks.
//! * [`anomaly`]: reciprocal-pair and dense-group collusion detectors.
//! * [`sim`]: seeded agent-based simulator and its evaluation report.

pub mod anomaly;
pub mod fixtures;
pub mod ids;
pub mod ledger;
pub mod metrics;
pub mod model;
pub mod sim;

pub use ids::{ArticleId, IssueId, ItemUri, ReviewId, ScholarId};
pub use ledger::{replay, EngineState, Event, EventPayload, StateDigest};
