//! Agent-based simulator that drives the protocol through its public append
//! interface and scores the resulting log.
//!
//! Each round, every agent derives its intended actions from the same
//! round-start snapshot using its own ChaCha stream, then the intentions are
//! appended in ascending agent order. Intentions the ledger rejects are
//! dropped and counted. A run is a pure function of its [`ScenarioConfig`].

mod agent;
mod config;
mod evaluate;
pub mod stats;

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use agent::{agent_round, AgentMemory, AgentSpec, ArticleInfo, Intention, Strategy, World};
pub use config::{
    ActivityRates, AgentGroup, BehaviorParams, ConfigError, QualityParams, ScenarioConfig,
    StrategyKind, DEFAULT_CLIQUE_SIZE, DEFAULT_FRIENDS,
};
pub use evaluate::{
    evaluate, CliqueInflation, DetectionOutcome, EvaluateError, GroundTruth, ScenarioReport,
    MIN_VALIDITY_VOTERS,
};

use crate::ids::ScholarId;
use crate::ledger::{EngineState, Event, EventPayload, ProtocolConfig, ScholarRegistered};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub events: Vec<Event>,
    pub truth: GroundTruth,
    pub report: ScenarioReport,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
}

/// Wall-clock label for events of `round`; registrations use round 0 and
/// simulated round `r` is labelled `r + 1` days after the epoch.
fn round_timestamp(round: u32) -> String {
    let base = DateTime::<Utc>::from_timestamp(1_704_067_200, 0).expect("valid epoch");
    (base + Duration::days(i64::from(round))).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Expands the configured groups into individual agents. Colluder cliques
/// are consecutive blocks; friend lists are drawn from stream 0.
pub fn build_agents(config: &ScenarioConfig) -> Vec<AgentSpec> {
    let n = config.agent_count();
    let mut setup = ChaCha8Rng::seed_from_u64(config.seed);
    let mut agents = Vec::with_capacity(n);
    let mut clique = 0;
    for group in &config.agents {
        let rates = group.rates.unwrap_or(config.rates);
        let start = agents.len();
        let clique_size = group.clique_size.unwrap_or(DEFAULT_CLIQUE_SIZE);
        for k in 0..group.count {
            let index = start + k;
            let strategy = match group.strategy {
                StrategyKind::Honest => Strategy::Honest,
                StrategyKind::Spammer => Strategy::Spammer,
                StrategyKind::FreeRider => Strategy::FreeRider,
                StrategyKind::Colluder => {
                    let block = start + k / clique_size * clique_size;
                    let peers = (block..block + clique_size)
                        .filter(|&p| p != index)
                        .collect();
                    Strategy::Colluder {
                        clique: clique + k / clique_size,
                        peers,
                    }
                }
                StrategyKind::FriendBiased => {
                    let want = group.friends.unwrap_or(DEFAULT_FRIENDS).min(n - 1);
                    let mut friends: Vec<usize> = sample(&mut setup, n - 1, want)
                        .into_iter()
                        .map(|f| if f >= index { f + 1 } else { f })
                        .collect();
                    friends.sort_unstable();
                    Strategy::FriendBiased { friends }
                }
            };
            agents.push(AgentSpec {
                index,
                id: ScholarId::new(format!("s{index:04}")),
                strategy,
                rates,
            });
        }
        if group.strategy == StrategyKind::Colluder {
            clique += group.count / clique_size;
        }
    }
    agents
}

fn ground_truth(config: &ScenarioConfig, agents: &[AgentSpec], world: &World) -> GroundTruth {
    let mut cliques: BTreeMap<usize, Vec<ScholarId>> = BTreeMap::new();
    let mut strategies = BTreeMap::new();
    for a in agents {
        let kind = match &a.strategy {
            Strategy::Honest => StrategyKind::Honest,
            Strategy::Spammer => StrategyKind::Spammer,
            Strategy::FreeRider => StrategyKind::FreeRider,
            Strategy::FriendBiased { .. } => StrategyKind::FriendBiased,
            Strategy::Colluder { clique, .. } => {
                cliques.entry(*clique).or_default().push(a.id.clone());
                StrategyKind::Colluder
            }
        };
        strategies.insert(a.id.clone(), kind);
    }
    GroundTruth {
        min_issue_size: config.min_issue_size,
        strategies,
        cliques: cliques.into_values().collect(),
        quality: world
            .articles
            .iter()
            .map(|a| (a.id.clone(), a.quality))
            .collect(),
    }
}

/// Runs `config` to completion and evaluates the resulting log.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationOutput, SimError> {
    config.validate()?;
    let agents = build_agents(config);
    let mut state = EngineState::with_config(ProtocolConfig {
        min_issue_size: config.min_issue_size,
    });
    let mut world = World::new(&agents);
    let mut events = Vec::new();
    let mut dropped = 0u64;

    let mut append =
        |state: &mut EngineState, world: &mut World, intention: Intention, round: u32, at: &str| {
            let event = Event::new(state.last_seq() + 1, at, intention.payload);
            if state.apply(&event).is_ok() {
                world.record(&event.payload, intention.quality, round);
                events.push(event);
            } else {
                dropped += 1;
            }
        };

    let at = round_timestamp(0);
    for a in &agents {
        let payload = EventPayload::from(ScholarRegistered {
            scholar: a.id.clone(),
            display_name: format!("Agent {}", a.index),
        });
        append(
            &mut state,
            &mut world,
            Intention {
                payload,
                quality: None,
            },
            0,
            &at,
        );
    }

    let mut rngs: Vec<ChaCha8Rng> = agents
        .iter()
        .map(|a| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(a.index as u64 + 1);
            rng
        })
        .collect();
    let mut memories = vec![AgentMemory::new(); agents.len()];

    for round in 0..config.rounds {
        let at = round_timestamp(round + 1);
        let intentions: Vec<Vec<Intention>> = agents
            .iter()
            .zip(rngs.iter_mut().zip(memories.iter_mut()))
            .map(|(a, (rng, memory))| agent_round(&world, a, memory, round, rng, config))
            .collect();
        for intention in intentions.into_iter().flatten() {
            append(&mut state, &mut world, intention, round, &at);
        }
    }

    let truth = ground_truth(config, &agents, &world);
    let mut report = evaluate(&events, &truth, &config.detector)?;
    report.dropped_intentions = dropped;
    Ok(SimulationOutput {
        events,
        truth,
        report,
    })
}
