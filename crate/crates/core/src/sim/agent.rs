//! Agent strategies and the per-round intention generator.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

use super::config::{ActivityRates, ScenarioConfig};
use crate::fixtures::article_uri;
use crate::ids::{ArticleId, ReviewId, ScholarId};
use crate::ledger::{
    ArticleRevised, ArticleSubmitted, EntryPayload, EventPayload, IssueReleased, PriorityToggled,
    ReviewPosted, ReviewVoteCast, SubscriptionChanged, ValidityVoteCast,
};
use crate::model::{ValidityChoice, VoteSign};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Honest,
    Spammer,
    /// Curates and validates only fellow clique members' articles.
    Colluder {
        clique: usize,
        peers: Vec<usize>,
    },
    /// Honest reader whose curation is restricted to friends.
    FriendBiased {
        friends: Vec<usize>,
    },
    FreeRider,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Spammer => "spammer",
            Strategy::Colluder { .. } => "colluder",
            Strategy::FriendBiased { .. } => "friend_biased",
            Strategy::FreeRider => "free_rider",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub index: usize,
    pub id: ScholarId,
    pub strategy: Strategy,
    pub rates: ActivityRates,
}

/// Simulator-side bookkeeping for one platform article.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleInfo {
    pub id: ArticleId,
    pub uri: String,
    pub author: usize,
    pub quality: f64,
    pub round: u32,
    pub version: u32,
    /// (review, reviewer index) in posting order.
    pub reviews: Vec<(ReviewId, usize)>,
    pub unacknowledged: Vec<ReviewId>,
    pub priority: u32,
}

/// What every agent can see at the start of a round.
#[derive(Debug, Clone, Default)]
pub struct World {
    pub articles: Vec<ArticleInfo>,
    index: HashMap<ArticleId, usize>,
    pub by_author: Vec<Vec<usize>>,
    agent_index: HashMap<ScholarId, usize>,
}

impl World {
    pub fn new(agents: &[AgentSpec]) -> Self {
        Self {
            articles: Vec::new(),
            index: HashMap::new(),
            by_author: vec![Vec::new(); agents.len()],
            agent_index: agents.iter().map(|a| (a.id.clone(), a.index)).collect(),
        }
    }

    pub fn article_index(&self, id: &ArticleId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// First article index submitted at or after `round`.
    fn first_since(&self, round: u32) -> usize {
        self.articles.partition_point(|a| a.round < round)
    }

    /// Records the effect of an event that the ledger accepted.
    pub fn record(&mut self, payload: &EventPayload, quality: Option<f64>, round: u32) {
        match payload {
            EventPayload::ArticleSubmitted(p) => {
                let author = p
                    .authors
                    .first()
                    .and_then(|a| self.agent_index.get(a))
                    .copied()
                    .expect("simulated articles have a simulated first author");
                let idx = self.articles.len();
                self.articles.push(ArticleInfo {
                    id: p.article.clone(),
                    uri: p.uri.clone(),
                    author,
                    quality: quality.expect("simulated submissions carry a quality"),
                    round,
                    version: 1,
                    reviews: Vec::new(),
                    unacknowledged: Vec::new(),
                    priority: 0,
                });
                self.index.insert(p.article.clone(), idx);
                self.by_author[author].push(idx);
            }
            EventPayload::ArticleRevised(p) => {
                if let Some(&i) = self.index.get(&p.article) {
                    let a = &mut self.articles[i];
                    a.version = p.version;
                    a.unacknowledged
                        .retain(|r| !p.acknowledged_reviews.contains(r));
                }
            }
            EventPayload::ReviewPosted(p) => {
                if let (Some(&i), Some(&reviewer)) = (
                    self.index.get(&p.article),
                    self.agent_index.get(&p.reviewer),
                ) {
                    let a = &mut self.articles[i];
                    a.reviews.push((p.review.clone(), reviewer));
                    a.unacknowledged.push(p.review.clone());
                }
            }
            EventPayload::PriorityToggled(p) => {
                let id = p
                    .item
                    .strip_prefix(crate::fixtures::ARTICLE_URI_BASE)
                    .map(ArticleId::from);
                if let Some(i) = id.and_then(|id| self.index.get(&id).copied()) {
                    let a = &mut self.articles[i];
                    if p.active {
                        a.priority += 1;
                    } else {
                        a.priority = a.priority.saturating_sub(1);
                    }
                }
            }
            _ => {}
        }
    }
}

/// Private per-agent state carried across rounds.
#[derive(Debug, Clone, Default)]
pub struct AgentMemory {
    read: HashSet<usize>,
    /// Articles read since the last issue, with perceived quality.
    pending: Vec<(usize, f64)>,
    curated: HashSet<usize>,
    marked: HashSet<usize>,
    voted: HashSet<usize>,
    reviewed: HashMap<usize, ReviewId>,
    upvoted: HashSet<ReviewId>,
    articles_written: u32,
    reviews_written: u32,
    issues_released: u32,
}

impl AgentMemory {
    pub fn new() -> Self {
        Self::default()
    }
}

/// An action an agent wants to take; the ledger may still reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct Intention {
    pub payload: EventPayload,
    /// Latent quality, for submissions.
    pub quality: Option<f64>,
}

impl Intention {
    fn new(payload: impl Into<EventPayload>) -> Self {
        Self {
            payload: payload.into(),
            quality: None,
        }
    }
}

struct RoundCtx<'a> {
    world: &'a World,
    agent: &'a AgentSpec,
    config: &'a ScenarioConfig,
    round: u32,
    out: Vec<Intention>,
}

impl RoundCtx<'_> {
    fn me(&self) -> &ScholarId {
        &self.agent.id
    }

    fn perceive(&self, article: usize, rng: &mut ChaCha8Rng) -> f64 {
        let q = self.world.articles[article].quality;
        let sigma = self.config.quality.noise_sigma;
        let noise = if sigma > 0.0 {
            Normal::new(0.0, sigma)
                .expect("sigma validated")
                .sample(rng)
        } else {
            0.0
        };
        (q + noise).clamp(0.0, 1.0)
    }

    fn publish(&mut self, memory: &mut AgentMemory, rng: &mut ChaCha8Rng) {
        let rate = self.agent.rates.articles_per_round;
        let mut n = rate.trunc() as u32;
        if rng.random::<f64>() < rate.fract() {
            n += 1;
        }
        let quality = &self.config.quality;
        let beta = Beta::new(quality.alpha, quality.beta).expect("shape validated");
        for _ in 0..n {
            let id = ArticleId::new(format!("a-{}-{}", self.me(), memory.articles_written));
            memory.articles_written += 1;
            let q = beta.sample(rng);
            self.out.push(Intention {
                quality: Some(q),
                payload: ArticleSubmitted {
                    uri: article_uri(id.as_str()),
                    authors: vec![self.me().clone()],
                    content_digest: format!("{id}-v1"),
                    article: id,
                }
                .into(),
            });
        }
    }

    fn revise(&mut self, rng: &mut ChaCha8Rng) {
        for &i in &self.world.by_author[self.agent.index] {
            let a = &self.world.articles[i];
            if a.unacknowledged.is_empty() {
                continue;
            }
            if rng.random::<f64>() < self.config.behavior.revision_probability {
                let version = a.version + 1;
                self.out.push(Intention::new(ArticleRevised {
                    article: a.id.clone(),
                    version,
                    content_digest: format!("{}-v{version}", a.id),
                    acknowledged_reviews: a.unacknowledged.clone(),
                }));
            }
        }
    }

    /// Samples unread recent articles, weighting by priority and recency.
    fn read(
        &mut self,
        memory: &mut AgentMemory,
        rng: &mut ChaCha8Rng,
        preferred: &[usize],
    ) -> Vec<usize> {
        let capacity = self.agent.rates.reading_capacity as usize;
        let behavior = &self.config.behavior;
        let since = self.round.saturating_sub(behavior.recency_window);
        let start = self.world.first_since(since);
        let me = self.agent.index;

        let mut picked: Vec<usize> = Vec::new();
        for i in start..self.world.articles.len() {
            if picked.len() >= capacity {
                break;
            }
            let a = &self.world.articles[i];
            if preferred.contains(&a.author) && !memory.read.contains(&i) {
                picked.push(i);
            }
        }

        let mut keyed: Vec<(f64, usize)> = Vec::new();
        for i in start..self.world.articles.len() {
            let a = &self.world.articles[i];
            if a.author == me || memory.read.contains(&i) || picked.contains(&i) {
                continue;
            }
            let age = self.round.saturating_sub(a.round) as i32;
            let weight = (1.0 + f64::from(a.priority)) * behavior.recency_decay.powi(age);
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            keyed.push((u.ln() / weight.max(f64::MIN_POSITIVE), i));
        }
        keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let room = capacity.saturating_sub(picked.len());
        picked.extend(keyed.into_iter().take(room).map(|(_, i)| i));
        for &i in &picked {
            memory.read.insert(i);
        }
        picked
    }

    fn mark(&mut self, memory: &mut AgentMemory, article: usize) {
        if memory.marked.insert(article) {
            self.out.push(Intention::new(PriorityToggled {
                scholar: self.me().clone(),
                item: self.world.articles[article].uri.clone(),
                active: true,
            }));
        }
    }

    fn reached(&mut self, memory: &mut AgentMemory, article: usize) {
        let a = &self.world.articles[article];
        memory.voted.insert(article);
        self.out.push(Intention::new(ValidityVoteCast {
            voter: self.me().clone(),
            article: a.id.clone(),
            choice: ValidityChoice::ReachedStandards,
            substantiation: None,
            version_seen: a.version,
        }));
    }

    /// A needs-revisions vote, substantiated by up-voting an existing
    /// review or, budget permitting, by writing one.
    fn needs(&mut self, memory: &mut AgentMemory, article: usize, reviews_left: &mut u32) {
        let a = &self.world.articles[article];
        let me = self.agent.index;
        let cited = if let Some(own) = memory.reviewed.get(&article) {
            Some(own.clone())
        } else if let Some((review, _)) = a.reviews.iter().find(|(_, reviewer)| *reviewer != me) {
            if memory.upvoted.insert(review.clone()) {
                self.out.push(Intention::new(ReviewVoteCast {
                    voter: self.me().clone(),
                    review: review.clone(),
                    sign: VoteSign::Up,
                }));
            }
            Some(review.clone())
        } else if *reviews_left > 0 {
            *reviews_left -= 1;
            let review = ReviewId::new(format!("r-{}-{}", self.me(), memory.reviews_written));
            memory.reviews_written += 1;
            memory.reviewed.insert(article, review.clone());
            self.out.push(Intention::new(ReviewPosted {
                review: review.clone(),
                article: a.id.clone(),
                target_version: a.version,
                reviewer: self.me().clone(),
                body: format!("Concerns with {} v{}.", a.id, a.version),
            }));
            Some(review)
        } else {
            None
        };
        if let Some(review) = cited {
            memory.voted.insert(article);
            self.out.push(Intention::new(ValidityVoteCast {
                voter: self.me().clone(),
                article: a.id.clone(),
                choice: ValidityChoice::NeedsRevisions,
                substantiation: Some(review),
                version_seen: a.version,
            }));
        }
    }

    fn issue_due(&self) -> bool {
        let cadence = self.agent.rates.issue_cadence;
        (self.round + self.agent.index as u32) % cadence == cadence - 1
    }

    fn release(&mut self, memory: &mut AgentMemory, items: Vec<String>) {
        let n = memory.issues_released;
        memory.issues_released += 1;
        self.out.push(Intention::new(IssueReleased {
            issue: format!("i-{}-{n}", self.me()).into(),
            owner: self.me().clone(),
            title: format!("Issue {n} of {}", self.me()),
            editorial: format!("Selected readings, round {}.", self.round),
            entries: items
                .into_iter()
                .map(|item| EntryPayload {
                    item,
                    comment: None,
                })
                .collect(),
        }));
    }

    /// Top-perceived pending articles, optionally filtered.
    fn best_pending(
        &self,
        memory: &AgentMemory,
        keep: impl Fn(usize) -> bool,
        limit: usize,
    ) -> Vec<usize> {
        let mut pool: Vec<(f64, usize)> = memory
            .pending
            .iter()
            .filter(|(i, _)| !memory.curated.contains(i) && keep(*i))
            .map(|&(i, q)| (q, i))
            .collect();
        pool.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        pool.into_iter().take(limit).map(|(_, i)| i).collect()
    }

    fn curate_honestly(&mut self, memory: &mut AgentMemory, keep: impl Fn(usize) -> bool) {
        let min = self.config.min_issue_size;
        let size = self.agent.rates.curation_size.max(min);
        let chosen = self.best_pending(memory, keep, size);
        if chosen.len() < min {
            return;
        }
        memory.pending.clear();
        memory.curated.extend(chosen.iter().copied());
        let items = chosen
            .iter()
            .map(|&i| self.world.articles[i].uri.clone())
            .collect();
        self.release(memory, items);
    }

    fn curate_clique(&mut self, memory: &mut AgentMemory, peers: &[usize]) {
        let min = self.config.min_issue_size;
        let mut chosen: Vec<usize> = Vec::new();
        for &p in peers {
            if let Some(&latest) = self.world.by_author[p].last() {
                chosen.push(latest);
            }
        }
        for &p in peers {
            for &i in &self.world.by_author[p] {
                if !memory.curated.contains(&i) && !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
        }
        if chosen.len() < min {
            let filler = self.best_pending(memory, |i| !chosen.contains(&i), min - chosen.len());
            chosen.extend(filler);
        }
        if chosen.len() < min {
            return;
        }
        memory.pending.clear();
        memory.curated.extend(chosen.iter().copied());
        let items = chosen
            .iter()
            .map(|&i| self.world.articles[i].uri.clone())
            .collect();
        self.release(memory, items);
    }

    fn spam(&mut self, memory: &mut AgentMemory, rng: &mut ChaCha8Rng) {
        let size = self
            .config
            .behavior
            .spam_issue_size
            .max(self.config.min_issue_size);
        let available = self.world.articles.len();
        let mut items: Vec<String> = sample(rng, available, size.min(available))
            .into_iter()
            .map(|i| self.world.articles[i].uri.clone())
            .collect();
        let mut k = 0;
        while items.len() < size {
            items.push(format!(
                "https://spam.example.net/{}/{}-{k}",
                self.me(),
                memory.issues_released
            ));
            k += 1;
        }
        self.release(memory, items);
    }
}

/// The actions `agent` intends to take this round, given the round-start
/// `world`. Uses only the agent's own RNG stream and memory, so the result
/// does not depend on how other agents are scheduled.
pub fn agent_round(
    world: &World,
    agent: &AgentSpec,
    memory: &mut AgentMemory,
    round: u32,
    rng: &mut ChaCha8Rng,
    config: &ScenarioConfig,
) -> Vec<Intention> {
    let mut ctx = RoundCtx {
        world,
        agent,
        config,
        round,
        out: Vec::new(),
    };

    if let Strategy::Spammer = agent.strategy {
        if ctx.issue_due() {
            ctx.spam(memory, rng);
        }
        return ctx.out;
    }

    ctx.publish(memory, rng);
    if let Strategy::FreeRider = agent.strategy {
        return ctx.out;
    }
    ctx.revise(rng);

    if round == 0 {
        if let Strategy::FriendBiased { friends } = &agent.strategy {
            for &f in friends {
                ctx.out.push(Intention::new(SubscriptionChanged {
                    subscriber: agent.id.clone(),
                    journal_owner: world_agent_id(world, f),
                    subscribed: true,
                }));
            }
        }
    }

    let (peers, friends): (&[usize], &[usize]) = match &agent.strategy {
        Strategy::Colluder { peers, .. } => (peers, &[]),
        Strategy::FriendBiased { friends } => (&[], friends),
        _ => (&[], &[]),
    };

    // Colluders validate every new peer article without reading it.
    if !peers.is_empty() {
        let since = world.first_since(round.saturating_sub(config.behavior.recency_window));
        for i in since..world.articles.len() {
            if peers.contains(&world.articles[i].author) && !memory.voted.contains(&i) {
                ctx.reached(memory, i);
            }
        }
    }

    let reads = ctx.read(memory, rng, friends);
    let mut reviews_left = agent.rates.reviews_per_round;
    let cutoff = config.behavior.reached_cutoff;
    for article in reads {
        let perceived = ctx.perceive(article, rng);
        memory.pending.push((article, perceived));
        if perceived >= config.behavior.priority_cutoff {
            ctx.mark(memory, article);
        }
        let votes = rng.random::<f64>() < agent.rates.vote_probability;
        if !votes
            || memory.voted.contains(&article)
            || peers.contains(&world.articles[article].author)
        {
            continue;
        }
        if perceived < cutoff {
            ctx.needs(memory, article, &mut reviews_left);
        } else if peers.is_empty() {
            ctx.reached(memory, article);
        }
    }

    if ctx.issue_due() {
        match &agent.strategy {
            Strategy::Colluder { peers, .. } => ctx.curate_clique(memory, peers),
            Strategy::FriendBiased { friends } => {
                ctx.curate_honestly(memory, |i| friends.contains(&world.articles[i].author))
            }
            _ => ctx.curate_honestly(memory, |_| true),
        }
    }
    ctx.out
}

fn world_agent_id(world: &World, index: usize) -> ScholarId {
    world
        .agent_index
        .iter()
        .find(|(_, &i)| i == index)
        .map(|(id, _)| id.clone())
        .expect("friend indices refer to simulated agents")
}
