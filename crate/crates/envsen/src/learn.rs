//! Lightweight multi-agent learners over a small discretized local state.
//!
//! Each sensor is an agent. Its local state is the mismatch between its own
//! reading and its belief estimate, a quantized channel-utilization feedback
//! signal from the previous step, and the outcome of its own previous
//! transmission: 2 x 4 x 2 = 16 states, 2 actions. Two agent families are
//! provided: independent Q-learning with a softmax (logistic) policy, and
//! REINFORCE on a per-state Bernoulli logit with a moving-average baseline.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::{step_reward, Error, Result, SensorSite, TransmissionRound};

/// Number of discretized local states.
pub const NUM_STATES: usize = 16;
/// Number of utilization buckets in the state discretization.
pub const UTILIZATION_BUCKETS: usize = 4;

/// What one sensor observes before acting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState {
    /// The sensor's own current bit.
    pub own_bit: bool,
    /// The sensor's estimate of the gateway's pre-update belief at its site.
    pub belief_bit: bool,
    /// Channel utilization of the previous step, in [0, 1], if the agent
    /// receives gateway feedback.
    pub feedback: Option<f64>,
    /// Outcome of the sensor's own previous transmission, if it made one.
    pub last_outcome: Option<bool>,
}

impl LocalState {
    pub fn mismatch(&self) -> bool {
        self.own_bit != self.belief_bit
    }

    /// Index into the 16-state table.
    pub fn index(&self) -> usize {
        let m = self.mismatch() as usize;
        let u = match self.feedback {
            None => 0,
            Some(f) => ((f.clamp(0.0, 1.0) * UTILIZATION_BUCKETS as f64) as usize)
                .min(UTILIZATION_BUCKETS - 1),
        };
        let o = self.last_outcome.unwrap_or(false) as usize;
        m * (UTILIZATION_BUCKETS * 2) + u * 2 + o
    }
}

/// Human-readable key for a state index, used in checkpoints.
pub fn state_key(index: usize) -> String {
    let m = index / (UTILIZATION_BUCKETS * 2);
    let u = (index / 2) % UTILIZATION_BUCKETS;
    let o = index % 2;
    format!("m{m}_u{u}_o{o}")
}

fn state_index_from_key(key: &str) -> Option<usize> {
    (0..NUM_STATES).find(|&i| state_key(i) == key)
}

/// Realized per-agent reward: 0 when idle, else `outcome * value - w * cost`.
pub fn local_reward(action: bool, outcome: bool, value: f64, cost: f64, w: f64) -> f64 {
    if !action {
        return 0.0;
    }
    let indicator = if outcome { 1.0 } else { 0.0 };
    indicator * value - w * cost
}

/// Reward signal an agent trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Per-agent realized reward (value earned minus weighted cost).
    EnvSen,
    /// Every agent receives the sum of all local rewards.
    GlobalSum,
    /// Every agent receives the negated post-update error loss.
    TrackingAccuracy,
}

impl Default for RewardMode {
    fn default() -> Self {
        RewardMode::EnvSen
    }
}

/// Kind of global reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalRewardKind {
    SumOfLocal,
    TrackingAccuracy,
}

/// Global reward for one round: either the sum of per-agent local rewards
/// or the negated error loss after the belief update.
pub fn global_reward(
    kind: GlobalRewardKind,
    round: &TransmissionRound,
    values: &[f64],
    sites: &[SensorSite],
    w: f64,
    post_update_error_loss: f64,
) -> Result<f64> {
    match kind {
        GlobalRewardKind::SumOfLocal => step_reward(round, values, sites, w),
        GlobalRewardKind::TrackingAccuracy => Ok(-post_update_error_loss),
    }
}

/// Channel-utilization feedback for one round: attempted packets divided by
/// the channel bank's packets-per-step budget, clamped to [0, 1]. The
/// budget is `M * C` for the bandwidth-limited bank, `M * A / 2` for the
/// random-access window and `M * W / tau` for the packet simulator.
pub fn feedback_signal(round: &TransmissionRound, capacity_units: f64) -> f64 {
    if capacity_units <= 0.0 {
        return 1.0;
    }
    (round.attempted().len() as f64 / capacity_units).clamp(0.0, 1.0)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Hyperparameters for independent Q-learning with a softmax policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqlConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Multiplicative temperature decay applied after each training episode.
    #[serde(default = "default_temperature_decay")]
    pub temperature_decay: f64,
    #[serde(default = "default_temperature_min")]
    pub temperature_min: f64,
    #[serde(default)]
    pub reward_mode: RewardMode,
    /// Whether the agent state includes the utilization feedback.
    #[serde(default = "default_true")]
    pub feedback: bool,
    /// Path to a trained checkpoint (for frozen evaluation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

fn default_alpha() -> f64 {
    0.1
}
fn default_gamma() -> f64 {
    0.9
}
fn default_temperature() -> f64 {
    0.2
}
fn default_temperature_decay() -> f64 {
    0.995
}
fn default_temperature_min() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}
fn default_baseline_decay() -> f64 {
    0.05
}

impl Default for IqlConfig {
    fn default() -> Self {
        IqlConfig {
            alpha: default_alpha(),
            gamma: default_gamma(),
            temperature: default_temperature(),
            temperature_decay: default_temperature_decay(),
            temperature_min: default_temperature_min(),
            reward_mode: RewardMode::EnvSen,
            feedback: true,
            checkpoint: None,
        }
    }
}

/// Hyperparameters for the Bernoulli policy-gradient agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Step size of the per-state moving-average baseline.
    #[serde(default = "default_baseline_decay")]
    pub baseline_decay: f64,
    /// Initial per-state logit. Negative values start the policy quiet, so
    /// agents pay little for states they have not learned yet.
    #[serde(default = "default_init_logit")]
    pub init_logit: f64,
    #[serde(default)]
    pub reward_mode: RewardMode,
    /// Whether the agent state includes the utilization feedback.
    #[serde(default = "default_true")]
    pub feedback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

fn default_init_logit() -> f64 {
    -2.0
}

impl Default for PgConfig {
    fn default() -> Self {
        PgConfig {
            alpha: default_alpha(),
            gamma: default_gamma(),
            baseline_decay: default_baseline_decay(),
            init_logit: default_init_logit(),
            reward_mode: RewardMode::EnvSen,
            feedback: true,
            checkpoint: None,
        }
    }
}

/// Tabular Q-learner for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct IqlAgent {
    /// Q-values indexed by state, then action (0 = idle, 1 = transmit).
    pub q: Vec<[f64; 2]>,
}

impl Default for IqlAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl IqlAgent {
    pub fn new() -> Self {
        IqlAgent {
            q: vec![[0.0; 2]; NUM_STATES],
        }
    }

    /// Softmax probability of transmitting in `state` at `temperature`.
    /// Over two actions the softmax is the logistic of the Q-difference,
    /// so it is invariant to shifting both Q-values by a constant.
    pub fn transmit_probability(&self, state: usize, temperature: f64) -> f64 {
        let [q0, q1] = self.q[state];
        sigmoid((q1 - q0) / temperature)
    }

    /// Sample an action from the softmax policy.
    pub fn step(&self, state: usize, temperature: f64, rng: &mut impl Rng) -> bool {
        rng.random::<f64>() < self.transmit_probability(state, temperature)
    }

    /// One-step Q-learning update toward `r + gamma * max_a' Q(s', a')`;
    /// `next_state = None` marks the end of an episode.
    pub fn update(
        &mut self,
        state: usize,
        action: bool,
        reward: f64,
        next_state: Option<usize>,
        alpha: f64,
        gamma: f64,
    ) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward);
        }
        let bootstrap = match next_state {
            Some(s) => {
                let [q0, q1] = self.q[s];
                q0.max(q1)
            }
            None => 0.0,
        };
        let target = reward + gamma * bootstrap;
        let q = &mut self.q[state][action as usize];
        *q += alpha * (target - *q);
        Ok(())
    }
}

/// One visited step of an agent's trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub state: usize,
    pub action: bool,
    pub reward: f64,
}

/// REINFORCE agent with a per-state Bernoulli logit and moving-average
/// baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PgAgent {
    pub logit: Vec<f64>,
    pub baseline: Vec<f64>,
}

impl Default for PgAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl PgAgent {
    pub fn new() -> Self {
        PgAgent {
            logit: vec![0.0; NUM_STATES],
            baseline: vec![0.0; NUM_STATES],
        }
    }

    pub fn with_initial_logit(init_logit: f64) -> Self {
        PgAgent {
            logit: vec![init_logit; NUM_STATES],
            baseline: vec![0.0; NUM_STATES],
        }
    }

    /// Transmit probability in `state`: the logistic of the state's logit,
    /// so it stays strictly inside (0, 1).
    pub fn transmit_probability(&self, state: usize) -> f64 {
        sigmoid(self.logit[state])
    }

    pub fn step(&self, state: usize, rng: &mut impl Rng) -> bool {
        rng.random::<f64>() < self.transmit_probability(state)
    }

    /// Episode update: discounted returns, advantages against the per-state
    /// baseline, then one gradient step
    /// `logit += alpha * sum_t (G_t - b) * (a_t - p)`. Baselines move
    /// toward the observed returns afterwards, so a trajectory whose
    /// returns all equal the baseline leaves the logits unchanged.
    pub fn update(
        &mut self,
        trajectory: &[TrajectoryStep],
        alpha: f64,
        gamma: f64,
        baseline_decay: f64,
    ) -> Result<()> {
        if trajectory.is_empty() {
            return Err(Error::InvalidArgument("trajectory must be non-empty".into()));
        }
        if trajectory.iter().any(|s| !s.reward.is_finite()) {
            return Err(Error::NonFiniteReward);
        }
        let mut returns = vec![0.0; trajectory.len()];
        let mut acc = 0.0;
        for (i, step) in trajectory.iter().enumerate().rev() {
            acc = step.reward + gamma * acc;
            returns[i] = acc;
        }
        let mut grad = vec![0.0; NUM_STATES];
        for (step, &ret) in trajectory.iter().zip(&returns) {
            let advantage = ret - self.baseline[step.state];
            let p = self.transmit_probability(step.state);
            grad[step.state] += advantage * (step.action as u8 as f64 - p);
        }
        for (logit, g) in self.logit.iter_mut().zip(&grad) {
            *logit += alpha * g;
        }
        for (step, &ret) in trajectory.iter().zip(&returns) {
            let b = &mut self.baseline[step.state];
            *b += baseline_decay * (ret - *b);
        }
        Ok(())
    }
}

/// Checkpoint entry for one policy-gradient state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgStateEntry {
    pub logit: f64,
    pub baseline: f64,
}

/// Serialized trained policy: per-agent tables keyed by readable state
/// names, plus the hyperparameters and training seed that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Checkpoint {
    Iql {
        config: IqlConfig,
        training_seed: u64,
        w: f64,
        /// Temperature the policy was frozen at.
        final_temperature: f64,
        agents: Vec<BTreeMap<String, [f64; 2]>>,
    },
    Pg {
        config: PgConfig,
        training_seed: u64,
        w: f64,
        agents: Vec<BTreeMap<String, PgStateEntry>>,
    },
}

impl Checkpoint {
    pub fn from_iql(
        agents: &[IqlAgent],
        config: &IqlConfig,
        training_seed: u64,
        w: f64,
        final_temperature: f64,
    ) -> Self {
        let agents = agents
            .iter()
            .map(|a| {
                a.q.iter()
                    .enumerate()
                    .map(|(i, &qs)| (state_key(i), qs))
                    .collect()
            })
            .collect();
        Checkpoint::Iql {
            config: config.clone(),
            training_seed,
            w,
            final_temperature,
            agents,
        }
    }

    pub fn from_pg(agents: &[PgAgent], config: &PgConfig, training_seed: u64, w: f64) -> Self {
        let agents = agents
            .iter()
            .map(|a| {
                (0..NUM_STATES)
                    .map(|i| {
                        (
                            state_key(i),
                            PgStateEntry {
                                logit: a.logit[i],
                                baseline: a.baseline[i],
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        Checkpoint::Pg {
            config: config.clone(),
            training_seed,
            w,
            agents,
        }
    }

    pub fn iql_agents(&self) -> Result<Vec<IqlAgent>> {
        match self {
            Checkpoint::Iql { agents, .. } => agents
                .iter()
                .map(|table| {
                    let mut agent = IqlAgent::new();
                    for (key, &qs) in table {
                        let idx = state_index_from_key(key).ok_or_else(|| {
                            Error::Config(format!("unknown state key {key:?} in checkpoint"))
                        })?;
                        agent.q[idx] = qs;
                    }
                    Ok(agent)
                })
                .collect(),
            Checkpoint::Pg { .. } => Err(Error::Config(
                "checkpoint holds a policy-gradient policy, not Q-tables".into(),
            )),
        }
    }

    pub fn pg_agents(&self) -> Result<Vec<PgAgent>> {
        match self {
            Checkpoint::Pg { agents, .. } => agents
                .iter()
                .map(|table| {
                    let mut agent = PgAgent::new();
                    for (key, entry) in table {
                        let idx = state_index_from_key(key).ok_or_else(|| {
                            Error::Config(format!("unknown state key {key:?} in checkpoint"))
                        })?;
                        agent.logit[idx] = entry.logit;
                        agent.baseline[idx] = entry.baseline;
                    }
                    Ok(agent)
                })
                .collect(),
            Checkpoint::Iql { .. } => Err(Error::Config(
                "checkpoint holds Q-tables, not a policy-gradient policy".into(),
            )),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let json = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&json)?)
    }
}
