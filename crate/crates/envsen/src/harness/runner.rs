//! Episode execution: wiring fire, belief, channel and policies into the
//! per-step round structure, with per-step bookkeeping.
//!
//! Step order within one round: (1) the fire advances; (2) the gateway
//! extrapolates its pre-update belief, which fixes every site's data value;
//! (3) each sensor observes its local state and acts; (4) the channel
//! resolves the round; (5) the belief incorporates the received reports;
//! (6) rewards and metrics are recorded; (7) learning policies update.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;

use crate::belief::{data_values, incorporate_reports, BeliefModel};
use crate::channel::AnalyticKind;
use crate::core::{
    energy_cost, error_loss, BeliefState, Error, FieldState, NeighborGraph, Result, SensorSite,
    TransmissionRound,
};
use crate::fire::{step_fire, FireScenario};
use crate::harness::config::ChannelConfig;
use crate::harness::rngs::{step_rng, Lane, Purpose};
use crate::learn::{
    feedback_signal, local_reward, Checkpoint, IqlAgent, IqlConfig, LocalState, PgAgent, PgConfig,
    RewardMode, TrajectoryStep,
};
use crate::policy::{centralized_greedy, stochastic_mixed, PolicySpec, Staleness};

/// Immutable per-evaluation environment shared by every episode.
pub struct EpisodeEnv<'a> {
    pub sites: &'a [SensorSite],
    pub graph: &'a NeighborGraph,
    pub belief_model: BeliefModel,
    pub channel: &'a ChannelConfig,
    pub w: f64,
    pub horizon: u32,
    /// Per-sensor weighted cost `w * c_i`.
    pub weighted_costs: Vec<f64>,
}

impl<'a> EpisodeEnv<'a> {
    pub fn new(
        sites: &'a [SensorSite],
        graph: &'a NeighborGraph,
        belief_model: BeliefModel,
        channel: &'a ChannelConfig,
        w: f64,
        horizon: u32,
    ) -> Self {
        let weighted_costs = sites.iter().map(|s| w * s.energy_cost).collect();
        EpisodeEnv {
            sites,
            graph,
            belief_model,
            channel,
            w,
            horizon,
            weighted_costs,
        }
    }
}

/// Stream addressing for one episode.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeStreams {
    pub master_seed: u64,
    pub purpose: Purpose,
    pub episode: u64,
}

/// What policies see before acting at one step.
pub struct StepView<'a> {
    pub step: u32,
    pub truth: &'a FieldState,
    pub pre_update: &'a [bool],
    pub values: &'a [f64],
    pub sites: &'a [SensorSite],
    pub weighted_costs: &'a [f64],
    pub w: f64,
    /// Channel utilization of the previous round (0 at the first step).
    pub utilization_prev: f64,
    /// Per-sensor outcome of its own previous attempt, if any.
    pub last_outcomes: &'a [Option<bool>],
}

/// What policies observe after the channel resolves.
pub struct StepOutcome<'a> {
    pub round: &'a TransmissionRound,
    /// Realized per-agent rewards (0 for idle agents).
    pub local_rewards: &'a [f64],
    pub post_error_loss: f64,
    pub utilization: f64,
}

/// Per-step trace passed to observers (tests, diagnostics).
pub struct StepTrace<'a> {
    pub step: u32,
    pub truth: &'a FieldState,
    pub values: &'a [f64],
    pub round: &'a TransmissionRound,
    pub post_belief: &'a BeliefState,
    pub post_error_loss: f64,
}

/// One row of an episode log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u32,
    pub attempted: usize,
    pub succeeded: usize,
    pub data_value: f64,
    pub energy_cost: f64,
    pub error_loss: f64,
    pub reward: f64,
}

/// Episode totals; each field is the sum (or mean) of the per-step rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTotals {
    pub attempted: usize,
    pub succeeded: usize,
    pub data_value: f64,
    pub energy_cost: f64,
    pub reward: f64,
    pub error_loss_sum: f64,
    pub mean_error_loss: f64,
    pub final_error_loss: f64,
}

/// Complete per-episode log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub scenario_index: usize,
    pub steps: Vec<StepRecord>,
    pub totals: EpisodeTotals,
}

impl EpisodeRecord {
    fn from_steps(scenario_index: usize, steps: Vec<StepRecord>) -> Self {
        let mut totals = EpisodeTotals::default();
        for s in &steps {
            totals.attempted += s.attempted;
            totals.succeeded += s.succeeded;
            totals.data_value += s.data_value;
            totals.energy_cost += s.energy_cost;
            totals.reward += s.reward;
            totals.error_loss_sum += s.error_loss;
        }
        totals.mean_error_loss = if steps.is_empty() {
            0.0
        } else {
            totals.error_loss_sum / steps.len() as f64
        };
        totals.final_error_loss = steps.last().map(|s| s.error_loss).unwrap_or(0.0);
        EpisodeRecord {
            scenario_index,
            steps,
            totals,
        }
    }
}

/// Shared cache of mixed-policy class probabilities for layouts where every
/// positive data value equals the same weight. Keyed by the number of
/// positive-value sensors; entries are `(p_positive, p_zero)`. Valid while
/// the curve, sensor count, weight and cost stay fixed, which holds within
/// one runner.
#[derive(Clone)]
struct UniformMixedCache {
    memo: Arc<Mutex<HashMap<usize, (f64, f64)>>>,
}

impl UniformMixedCache {
    fn new() -> Self {
        UniformMixedCache {
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    fn class_probs(
        &self,
        positives: usize,
        n: usize,
        value: f64,
        wc: f64,
        curve: &AnalyticKind,
    ) -> Result<(f64, f64)> {
        if let Some(&hit) = self.memo.lock().unwrap().get(&positives) {
            return Ok(hit);
        }
        let mut canonical = vec![0.0; n];
        for v in canonical.iter_mut().take(positives) {
            *v = value;
        }
        let probs = stochastic_mixed(&canonical, &vec![wc; n], |k| curve.success(k))?;
        let p_pos = if positives > 0 { probs[0] } else { 0.0 };
        let p_zero = if positives < n { probs[positives] } else { 0.0 };
        self.memo.lock().unwrap().insert(positives, (p_pos, p_zero));
        Ok((p_pos, p_zero))
    }
}

/// The uniform positive value shared by all nonzero entries, if any; `None`
/// when two different positive values coexist.
fn uniform_positive(values: &[f64]) -> Option<f64> {
    let mut found: Option<f64> = None;
    for &v in values {
        if v > 0.0 {
            match found {
                None => found = Some(v),
                Some(f) if f == v => {}
                Some(_) => return None,
            }
        }
    }
    Some(found.unwrap_or(0.0))
}

/// A policy wired for episode execution. Learned runners own their agent
/// tables; `set_learning(false)` freezes them for evaluation.
#[derive(Clone)]
pub struct PolicyRunner {
    inner: RunnerKind,
}

#[derive(Clone)]
enum RunnerKind {
    Heuristic,
    RandomP {
        p: f64,
    },
    StochasticUniform {
        curve: AnalyticKind,
        cache: UniformMixedCache,
    },
    CentralizedGreedy {
        curve: AnalyticKind,
    },
    OptimalAsync {
        curve: AnalyticKind,
        staleness: Staleness,
        cache: UniformMixedCache,
        stale: Vec<f64>,
        history: Vec<Vec<f64>>,
    },
    Iql(IqlRunner),
    Pg(PgRunner),
}

#[derive(Clone)]
struct IqlRunner {
    cfg: IqlConfig,
    agents: Vec<IqlAgent>,
    temperature: f64,
    learning: bool,
    staged: Option<(Vec<usize>, Vec<bool>)>,
    pending: Option<(Vec<usize>, Vec<bool>, Vec<f64>)>,
}

#[derive(Clone)]
struct PgRunner {
    cfg: PgConfig,
    agents: Vec<PgAgent>,
    learning: bool,
    staged: Option<(Vec<usize>, Vec<bool>)>,
    trajectories: Vec<Vec<TrajectoryStep>>,
}

fn analytic_curve(spec: &PolicySpec, channel: &ChannelConfig) -> Result<AnalyticKind> {
    channel.pooled_curve().ok_or_else(|| {
        Error::Config(format!(
            "policy {:?} needs an analytic channel curve; the packet-level channel has none",
            spec.name()
        ))
    })
}

impl PolicyRunner {
    /// Build a runner from its config spec. Learned policies start
    /// untrained (and in learning mode when `learning` is set).
    pub fn build(spec: &PolicySpec, channel: &ChannelConfig, num_sensors: usize) -> Result<Self> {
        let inner = match spec {
            PolicySpec::Heuristic => RunnerKind::Heuristic,
            PolicySpec::RandomP { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config("random_p probability must be in [0, 1]".into()));
                }
                RunnerKind::RandomP { p: *p }
            }
            PolicySpec::StochasticUniform => RunnerKind::StochasticUniform {
                curve: analytic_curve(spec, channel)?,
                cache: UniformMixedCache::new(),
            },
            PolicySpec::CentralizedGreedy => RunnerKind::CentralizedGreedy {
                curve: analytic_curve(spec, channel)?,
            },
            PolicySpec::OptimalAsync { staleness } => RunnerKind::OptimalAsync {
                curve: analytic_curve(spec, channel)?,
                staleness: *staleness,
                cache: UniformMixedCache::new(),
                stale: vec![0.0; num_sensors],
                history: Vec::new(),
            },
            PolicySpec::Iql(cfg) => RunnerKind::Iql(IqlRunner {
                cfg: cfg.clone(),
                agents: vec![IqlAgent::new(); num_sensors],
                temperature: cfg.temperature,
                learning: false,
                staged: None,
                pending: None,
            }),
            PolicySpec::Pg(cfg) => RunnerKind::Pg(PgRunner {
                cfg: cfg.clone(),
                agents: vec![PgAgent::with_initial_logit(cfg.init_logit); num_sensors],
                learning: false,
                staged: None,
                trajectories: vec![Vec::new(); num_sensors],
            }),
        };
        Ok(PolicyRunner { inner })
    }

    /// Build a frozen runner from a trained checkpoint.
    pub fn from_checkpoint(
        spec: &PolicySpec,
        channel: &ChannelConfig,
        num_sensors: usize,
        checkpoint: &Checkpoint,
    ) -> Result<Self> {
        let mut runner = Self::build(spec, channel, num_sensors)?;
        match (&mut runner.inner, checkpoint) {
            (RunnerKind::Iql(r), Checkpoint::Iql {
                final_temperature, ..
            }) => {
                r.agents = checkpoint.iql_agents()?;
                r.temperature = *final_temperature;
            }
            (RunnerKind::Pg(r), Checkpoint::Pg { .. }) => {
                r.agents = checkpoint.pg_agents()?;
            }
            _ => {
                return Err(Error::Config(
                    "checkpoint kind does not match the configured policy".into(),
                ))
            }
        }
        if runner.num_agents() != Some(num_sensors) {
            return Err(Error::Config(format!(
                "checkpoint holds {} agents but the layout has {num_sensors} sensors",
                runner.num_agents().unwrap_or(0)
            )));
        }
        Ok(runner)
    }

    fn num_agents(&self) -> Option<usize> {
        match &self.inner {
            RunnerKind::Iql(r) => Some(r.agents.len()),
            RunnerKind::Pg(r) => Some(r.agents.len()),
            _ => None,
        }
    }

    pub fn set_learning(&mut self, learning: bool) {
        match &mut self.inner {
            RunnerKind::Iql(r) => r.learning = learning,
            RunnerKind::Pg(r) => r.learning = learning,
            _ => {}
        }
    }

    /// Trained policy-gradient tables, if this is a policy-gradient runner.
    pub fn pg_agents(&self) -> Option<&[PgAgent]> {
        match &self.inner {
            RunnerKind::Pg(r) => Some(&r.agents),
            _ => None,
        }
    }

    /// Trained Q-tables, if this is a Q-learning runner.
    pub fn iql_agents(&self) -> Option<&[IqlAgent]> {
        match &self.inner {
            RunnerKind::Iql(r) => Some(&r.agents),
            _ => None,
        }
    }

    /// Serialize a trained policy.
    pub fn checkpoint(&self, training_seed: u64, w: f64) -> Result<Checkpoint> {
        match &self.inner {
            RunnerKind::Iql(r) => Ok(Checkpoint::from_iql(
                &r.agents,
                &r.cfg,
                training_seed,
                w,
                r.temperature,
            )),
            RunnerKind::Pg(r) => Ok(Checkpoint::from_pg(&r.agents, &r.cfg, training_seed, w)),
            _ => Err(Error::Config(
                "only learned policies produce checkpoints".into(),
            )),
        }
    }

    fn begin_episode(&mut self) {
        match &mut self.inner {
            RunnerKind::OptimalAsync { stale, history, .. } => {
                stale.iter_mut().for_each(|v| *v = 0.0);
                history.clear();
            }
            RunnerKind::Iql(r) => {
                r.staged = None;
                r.pending = None;
            }
            RunnerKind::Pg(r) => {
                r.staged = None;
                r.trajectories.iter_mut().for_each(Vec::clear);
            }
            _ => {}
        }
    }

    fn decide(&mut self, view: &StepView<'_>, rng: &mut ChaCha8Rng) -> Result<BTreeSet<usize>> {
        use rand::Rng;
        let n = view.sites.len();
        match &mut self.inner {
            RunnerKind::Heuristic => Ok((0..n)
                .filter(|&i| view.truth.fire[i] != view.pre_update[i])
                .collect()),
            RunnerKind::RandomP { p } => {
                let mut attempted = BTreeSet::new();
                for i in 0..n {
                    let u: f64 = rng.random();
                    if view.truth.fire[i] != view.pre_update[i] && u < *p {
                        attempted.insert(i);
                    }
                }
                Ok(attempted)
            }
            RunnerKind::StochasticUniform { curve, cache } => {
                let wc = view.weighted_costs.first().copied().unwrap_or(0.0);
                let probs: Vec<f64> = match uniform_positive(view.values) {
                    Some(value) => {
                        let positives = view.values.iter().filter(|&&v| v > 0.0).count();
                        let (p_pos, p_zero) =
                            cache.class_probs(positives, n, value, wc, curve)?;
                        view.values
                            .iter()
                            .map(|&v| if v > 0.0 { p_pos } else { p_zero })
                            .collect()
                    }
                    None => {
                        stochastic_mixed(view.values, view.weighted_costs, |k| curve.success(k))?
                    }
                };
                let mut attempted = BTreeSet::new();
                for (i, &p) in probs.iter().enumerate() {
                    let u: f64 = rng.random();
                    if u < p {
                        attempted.insert(i);
                    }
                }
                Ok(attempted)
            }
            RunnerKind::CentralizedGreedy { curve } => {
                let selection =
                    centralized_greedy(view.values, view.weighted_costs, |k| curve.success(k))?;
                Ok(selection.selected)
            }
            RunnerKind::OptimalAsync {
                curve,
                staleness,
                cache,
                stale,
                history,
            } => {
                let wc = view.weighted_costs.first().copied().unwrap_or(0.0);
                let stale_view: &[f64] = match staleness {
                    Staleness::LastSuccess => stale,
                    Staleness::FixedLag { lag } => {
                        let lag = (*lag).max(1) as usize;
                        if history.len() >= lag {
                            &history[history.len() - lag]
                        } else {
                            stale // all zeros before enough history exists
                        }
                    }
                };
                let mut attempted = BTreeSet::new();
                // Memoizable when the stale view and the current values
                // share one positive weight.
                let mut combined = stale_view.to_vec();
                combined.extend_from_slice(view.values);
                let uniform = uniform_positive(&combined);
                for i in 0..n {
                    let own = view.values[i];
                    let p = match uniform {
                        Some(value) if value > 0.0 => {
                            let mut q = stale_view
                                .iter()
                                .enumerate()
                                .filter(|&(j, &v)| j != i && v > 0.0)
                                .count();
                            if own > 0.0 {
                                q += 1;
                            }
                            let (p_pos, p_zero) = cache.class_probs(q, n, value, wc, curve)?;
                            if own > 0.0 {
                                p_pos
                            } else {
                                p_zero
                            }
                        }
                        _ => crate::policy::optimal_async_policy(
                            i,
                            own,
                            stale_view,
                            view.weighted_costs,
                            |k| curve.success(k),
                        )?,
                    };
                    let u: f64 = rng.random();
                    if u < p {
                        attempted.insert(i);
                    }
                }
                Ok(attempted)
            }
            RunnerKind::Iql(r) => {
                let states: Vec<usize> = (0..n)
                    .map(|i| local_state(r.cfg.feedback, view, i).index())
                    .collect();
                if r.learning {
                    if let Some((ps, pa, pr)) = r.pending.take() {
                        for i in 0..n {
                            r.agents[i].update(
                                ps[i],
                                pa[i],
                                pr[i],
                                Some(states[i]),
                                r.cfg.alpha,
                                r.cfg.gamma,
                            )?;
                        }
                    }
                }
                let mut attempted = BTreeSet::new();
                let mut actions = Vec::with_capacity(n);
                for i in 0..n {
                    let a = r.agents[i].step(states[i], r.temperature, rng);
                    actions.push(a);
                    if a {
                        attempted.insert(i);
                    }
                }
                r.staged = Some((states, actions));
                Ok(attempted)
            }
            RunnerKind::Pg(r) => {
                let states: Vec<usize> = (0..n)
                    .map(|i| local_state(r.cfg.feedback, view, i).index())
                    .collect();
                let mut attempted = BTreeSet::new();
                let mut actions = Vec::with_capacity(n);
                for i in 0..n {
                    let a = r.agents[i].step(states[i], rng);
                    actions.push(a);
                    if a {
                        attempted.insert(i);
                    }
                }
                r.staged = Some((states, actions));
                Ok(attempted)
            }
        }
    }

    fn observe(&mut self, view: &StepView<'_>, outcome: &StepOutcome<'_>) -> Result<()> {
        match &mut self.inner {
            RunnerKind::OptimalAsync {
                staleness,
                stale,
                history,
                ..
            } => {
                match staleness {
                    Staleness::LastSuccess => {
                        for &i in outcome.round.succeeded() {
                            stale[i] = view.values[i];
                        }
                    }
                    Staleness::FixedLag { .. } => history.push(view.values.to_vec()),
                }
                Ok(())
            }
            RunnerKind::Iql(r) => {
                if let Some((states, actions)) = r.staged.take() {
                    let rewards = training_rewards(r.cfg.reward_mode, &actions, outcome);
                    r.pending = Some((states, actions, rewards));
                }
                Ok(())
            }
            RunnerKind::Pg(r) => {
                if let Some((states, actions)) = r.staged.take() {
                    let rewards = training_rewards(r.cfg.reward_mode, &actions, outcome);
                    for i in 0..actions.len() {
                        r.trajectories[i].push(TrajectoryStep {
                            state: states[i],
                            action: actions[i],
                            reward: rewards[i],
                        });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn end_episode(&mut self) -> Result<()> {
        match &mut self.inner {
            RunnerKind::Iql(r) => {
                if r.learning {
                    if let Some((ps, pa, pr)) = r.pending.take() {
                        for i in 0..ps.len() {
                            r.agents[i].update(ps[i], pa[i], pr[i], None, r.cfg.alpha, r.cfg.gamma)?;
                        }
                    }
                    r.temperature =
                        (r.temperature * r.cfg.temperature_decay).max(r.cfg.temperature_min);
                }
                r.pending = None;
                r.staged = None;
                Ok(())
            }
            RunnerKind::Pg(r) => {
                if r.learning {
                    for (agent, traj) in r.agents.iter_mut().zip(&r.trajectories) {
                        if !traj.is_empty() {
                            agent.update(traj, r.cfg.alpha, r.cfg.gamma, r.cfg.baseline_decay)?;
                        }
                    }
                }
                r.trajectories.iter_mut().for_each(Vec::clear);
                r.staged = None;
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn local_state(with_feedback: bool, view: &StepView<'_>, i: usize) -> LocalState {
    LocalState {
        own_bit: view.truth.fire[i],
        belief_bit: view.pre_update[i],
        feedback: with_feedback.then_some(view.utilization_prev),
        last_outcome: view.last_outcomes[i],
    }
}

fn training_rewards(mode: RewardMode, actions: &[bool], outcome: &StepOutcome<'_>) -> Vec<f64> {
    match mode {
        RewardMode::EnvSen => outcome.local_rewards.to_vec(),
        RewardMode::GlobalSum => {
            let total: f64 = outcome.local_rewards.iter().sum();
            vec![total; actions.len()]
        }
        RewardMode::TrackingAccuracy => vec![-outcome.post_error_loss; actions.len()],
    }
}

/// Run one episode and return its record.
pub fn run_episode(
    env: &EpisodeEnv<'_>,
    scenario: &FireScenario,
    scenario_index: usize,
    runner: &mut PolicyRunner,
    streams: &EpisodeStreams,
) -> Result<EpisodeRecord> {
    run_episode_observed(env, scenario, scenario_index, runner, streams, |_| {})
}

/// Run one episode, invoking `observer` with a full trace after every step.
pub fn run_episode_observed(
    env: &EpisodeEnv<'_>,
    scenario: &FireScenario,
    scenario_index: usize,
    runner: &mut PolicyRunner,
    streams: &EpisodeStreams,
    mut observer: impl FnMut(&StepTrace<'_>),
) -> Result<EpisodeRecord> {
    let n = env.sites.len();
    scenario.validate(n)?;
    if scenario.horizon < env.horizon {
        return Err(Error::Config(format!(
            "scenario horizon {} shorter than configured horizon {}",
            scenario.horizon, env.horizon
        )));
    }

    let mut state = scenario.initial_state(n)?;
    let mut belief = BeliefState::initial(n);
    let mut last_outcomes: Vec<Option<bool>> = vec![None; n];
    let mut utilization_prev = 0.0;
    let mut steps = Vec::with_capacity(env.horizon as usize);

    runner.begin_episode();
    for step in 1..=env.horizon {
        let mut fire_rng = scenario.step_rng(state.t);
        state = step_fire(&state, scenario, env.graph, &mut fire_rng)?;

        let pre_update = env.belief_model.pre_update(&belief, env.graph);
        let z_state = BeliefState {
            t: belief.t,
            belief: pre_update.clone(),
            pre_update: pre_update.clone(),
        };
        let values = data_values(&state, &z_state, env.sites);

        let view = StepView {
            step,
            truth: &state,
            pre_update: &pre_update,
            values: &values,
            sites: env.sites,
            weighted_costs: &env.weighted_costs,
            w: env.w,
            utilization_prev,
            last_outcomes: &last_outcomes,
        };

        let mut action_rng = step_rng(
            streams.master_seed,
            streams.purpose,
            streams.episode,
            step,
            Lane::Action,
        );
        let attempted = runner.decide(&view, &mut action_rng)?;

        let mut channel_rng = step_rng(
            streams.master_seed,
            streams.purpose,
            streams.episode,
            step,
            Lane::Channel,
        );
        let round = env.channel.resolve(&attempted, env.sites, &mut channel_rng)?;

        let received: std::collections::BTreeMap<usize, bool> = round
            .succeeded()
            .iter()
            .map(|&i| (i, state.fire[i]))
            .collect();
        belief = incorporate_reports(&pre_update, &received, belief.t + 1);

        let post_error_loss = error_loss(&state, &belief, env.sites)?;
        let local_rewards: Vec<f64> = (0..n)
            .map(|i| {
                local_reward(
                    round.attempted().contains(&i),
                    round.outcome(i),
                    values[i],
                    env.sites[i].energy_cost,
                    env.w,
                )
            })
            .collect();
        let utilization = feedback_signal(&round, env.channel.capacity_units());

        let step_outcome = StepOutcome {
            round: &round,
            local_rewards: &local_rewards,
            post_error_loss,
            utilization,
        };
        runner.observe(&view, &step_outcome)?;

        // fold from +0.0: an empty f64 sum() yields -0.0, which would
        // print as "-0" in the CSV
        let step_value: f64 = round
            .succeeded()
            .iter()
            .map(|&i| values[i])
            .fold(0.0, |acc, v| acc + v);
        let step_cost = energy_cost(&attempted, env.sites)?;
        steps.push(StepRecord {
            step,
            attempted: attempted.len(),
            succeeded: round.succeeded().len(),
            data_value: step_value,
            energy_cost: step_cost,
            error_loss: post_error_loss,
            // The per-step objective summand; kept as value - w * cost so
            // the bookkeeping identity over the record is exact.
            reward: step_value - env.w * step_cost,
        });

        observer(&StepTrace {
            step,
            truth: &state,
            values: &values,
            round: &round,
            post_belief: &belief,
            post_error_loss,
        });

        for i in 0..n {
            last_outcomes[i] = if round.attempted().contains(&i) {
                Some(round.outcome(i))
            } else {
                None
            };
        }
        utilization_prev = utilization;
    }
    runner.end_episode()?;

    Ok(EpisodeRecord::from_steps(scenario_index, steps))
}
