use serde::{Deserialize, Serialize};

use crate::anomaly::DetectorParams;
use crate::model::MIN_ISSUE_SIZE;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid scenario config: {0}")]
    Invalid(String),
    #[error("cannot parse scenario config: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Honest,
    Spammer,
    Colluder,
    FriendBiased,
    FreeRider,
}

/// Per-agent activity knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActivityRates {
    /// Expected submissions per round; the integer part is submitted
    /// outright and the fraction is a Bernoulli draw.
    pub articles_per_round: f64,
    /// Reviews an agent may write per round.
    pub reviews_per_round: u32,
    /// Articles read per round.
    pub reading_capacity: u32,
    /// Rounds between issue releases.
    pub issue_cadence: u32,
    /// Probability of casting a validity vote on an article just read.
    pub vote_probability: f64,
    /// Entries per honest issue (raised to the minimum issue size if lower).
    pub curation_size: usize,
}

impl Default for ActivityRates {
    fn default() -> Self {
        Self {
            articles_per_round: 0.2,
            reviews_per_round: 1,
            reading_capacity: 10,
            issue_cadence: 5,
            vote_probability: 0.5,
            curation_size: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityParams {
    /// Beta shape parameters of latent article quality.
    pub alpha: f64,
    pub beta: f64,
    /// Standard deviation of per-reader perception noise.
    pub noise_sigma: f64,
}

impl Default for QualityParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 5.0,
            noise_sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BehaviorParams {
    /// Perceived quality at or above which an agent votes REACHED_STANDARDS.
    pub reached_cutoff: f64,
    /// Perceived quality at or above which an agent marks for priority.
    pub priority_cutoff: f64,
    /// Only articles submitted within this many rounds are candidates for reading.
    pub recency_window: u32,
    /// Per-round multiplicative discount of reading weight by article age.
    pub recency_decay: f64,
    /// Entries per spammer issue.
    pub spam_issue_size: usize,
    /// Probability per round that an author revises a reviewed article.
    pub revision_probability: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            reached_cutoff: 0.5,
            priority_cutoff: 0.6,
            recency_window: 5,
            recency_decay: 0.8,
            spam_issue_size: 10,
            revision_probability: 0.1,
        }
    }
}

/// A block of identical agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentGroup {
    pub strategy: StrategyKind,
    pub count: usize,
    /// Colluders only: the block is split into cliques of this size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique_size: Option<usize>,
    /// Friend-biased only: friends drawn per agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friends: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<ActivityRates>,
}

impl AgentGroup {
    pub fn new(strategy: StrategyKind, count: usize) -> Self {
        Self {
            strategy,
            count,
            clique_size: None,
            friends: None,
            rates: None,
        }
    }

    pub fn colluders(count: usize, clique_size: usize) -> Self {
        Self {
            clique_size: Some(clique_size),
            ..Self::new(StrategyKind::Colluder, count)
        }
    }
}

pub const DEFAULT_CLIQUE_SIZE: usize = 5;
pub const DEFAULT_FRIENDS: usize = 5;

fn default_min_issue_size() -> usize {
    MIN_ISSUE_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub rounds: u32,
    pub agents: Vec<AgentGroup>,
    #[serde(default)]
    pub rates: ActivityRates,
    #[serde(default)]
    pub quality: QualityParams,
    #[serde(default)]
    pub behavior: BehaviorParams,
    #[serde(default = "default_min_issue_size")]
    pub min_issue_size: usize,
    #[serde(default)]
    pub detector: DetectorParams,
}

fn in_unit(name: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!(
            "{name} must lie in [0, 1], got {v}"
        )))
    }
}

impl ScenarioConfig {
    pub fn new(seed: u64, rounds: u32, agents: Vec<AgentGroup>) -> Self {
        Self {
            seed,
            rounds,
            agents,
            rates: ActivityRates::default(),
            quality: QualityParams::default(),
            behavior: BehaviorParams::default(),
            min_issue_size: MIN_ISSUE_SIZE,
            detector: DetectorParams::default(),
        }
    }

    /// `honest` honest agents only.
    pub fn honest(seed: u64, rounds: u32, honest: usize) -> Self {
        Self::new(
            seed,
            rounds,
            vec![AgentGroup::new(StrategyKind::Honest, honest)],
        )
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    pub fn agent_count(&self) -> usize {
        self.agents.iter().map(|g| g.count).sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.agents.is_empty() || self.agent_count() == 0 {
            return Err(ConfigError::Invalid(
                "at least one agent is required".into(),
            ));
        }
        if self.min_issue_size == 0 {
            return Err(ConfigError::Invalid(
                "min_issue_size must be positive".into(),
            ));
        }
        let q = &self.quality;
        if !(q.alpha > 0.0 && q.beta > 0.0) {
            return Err(ConfigError::Invalid(
                "quality alpha and beta must be positive".into(),
            ));
        }
        if !(q.noise_sigma >= 0.0 && q.noise_sigma.is_finite()) {
            return Err(ConfigError::Invalid(
                "noise_sigma must be a non-negative number".into(),
            ));
        }
        let b = &self.behavior;
        in_unit("reached_cutoff", b.reached_cutoff)?;
        in_unit("priority_cutoff", b.priority_cutoff)?;
        in_unit("recency_decay", b.recency_decay)?;
        in_unit("revision_probability", b.revision_probability)?;
        if b.recency_window == 0 {
            return Err(ConfigError::Invalid(
                "recency_window must be positive".into(),
            ));
        }
        self.detector
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for group in
            std::iter::once(&self.rates).chain(self.agents.iter().filter_map(|g| g.rates.as_ref()))
        {
            if !(group.articles_per_round >= 0.0 && group.articles_per_round.is_finite()) {
                return Err(ConfigError::Invalid(
                    "articles_per_round must be >= 0".into(),
                ));
            }
            in_unit("vote_probability", group.vote_probability)?;
            if group.issue_cadence == 0 {
                return Err(ConfigError::Invalid(
                    "issue_cadence must be positive".into(),
                ));
            }
        }
        for group in &self.agents {
            if group.strategy == StrategyKind::Colluder {
                let size = group.clique_size.unwrap_or(DEFAULT_CLIQUE_SIZE);
                if size < 2 || group.count % size != 0 {
                    return Err(ConfigError::Invalid(format!(
                        "{} colluders cannot be split into cliques of {size}",
                        group.count
                    )));
                }
            } else if group.clique_size.is_some() {
                return Err(ConfigError::Invalid(
                    "clique_size only applies to colluders".into(),
                ));
            }
            if group.friends.is_some() && group.strategy != StrategyKind::FriendBiased {
                return Err(ConfigError::Invalid(
                    "friends only applies to friend_biased agents".into(),
                ));
            }
        }
        Ok(())
    }
}
