//! Frozen-policy evaluation over held-out episodes, and weight sweeps.

use crate::core::{Error, NeighborGraph, Result, SensorSite};
use crate::fire::FireScenario;
use crate::harness::config::ExperimentConfig;
use crate::harness::exec::{map_indexed, ExecMode};
use crate::harness::rngs::Purpose;
use crate::harness::runner::{run_episode, EpisodeEnv, EpisodeRecord, EpisodeStreams, PolicyRunner};
use crate::harness::train::train_policy;
use crate::learn::Checkpoint;
use crate::policy::PolicySpec;

/// A prepared experiment: validated config plus the derived layout, spread
/// graph and scenario list. Scenarios are split into a training prefix and
/// a held-out evaluation suffix.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub sites: Vec<SensorSite>,
    pub graph: NeighborGraph,
    pub scenarios: Vec<FireScenario>,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let sites = config.sites();
        crate::core::validate_sites(&sites)?;
        let graph = match config.neighbor_radius {
            Some(r) => NeighborGraph::new(&sites, r)?,
            None => NeighborGraph::with_default_radius(&sites)?,
        };
        let scenarios = config.scenarios(&sites)?;
        if scenarios.len() < config.eval_episodes {
            return Err(Error::Config(format!(
                "{} scenarios cannot cover {} evaluation episodes",
                scenarios.len(),
                config.eval_episodes
            )));
        }
        Ok(Experiment {
            config,
            sites,
            graph,
            scenarios,
        })
    }

    /// Index of the first held-out scenario.
    pub fn eval_offset(&self) -> usize {
        self.scenarios.len() - self.config.eval_episodes
    }

    pub fn train_scenarios(&self) -> &[FireScenario] {
        &self.scenarios[..self.eval_offset()]
    }

    pub fn eval_scenarios(&self) -> &[FireScenario] {
        &self.scenarios[self.eval_offset()..]
    }

    pub fn env(&self, w: f64) -> EpisodeEnv<'_> {
        EpisodeEnv::new(
            &self.sites,
            &self.graph,
            self.config.belief,
            &self.config.channel,
            w,
            self.config.horizon,
        )
    }

    /// Build the configured policy ready for frozen evaluation, loading a
    /// checkpoint when the policy is a learned one.
    pub fn frozen_runner(&self) -> Result<PolicyRunner> {
        let spec = &self.config.policy;
        let checkpoint_path = match spec {
            PolicySpec::Iql(cfg) => cfg.checkpoint.clone(),
            PolicySpec::Pg(cfg) => cfg.checkpoint.clone(),
            _ => None,
        };
        match (spec.is_learned(), checkpoint_path) {
            (true, Some(path)) => {
                let checkpoint = Checkpoint::load(std::path::Path::new(&path))?;
                PolicyRunner::from_checkpoint(
                    spec,
                    &self.config.channel,
                    self.sites.len(),
                    &checkpoint,
                )
            }
            (true, None) => Err(Error::Config(
                "learned policy needs a checkpoint for frozen evaluation; run `train` first or set policy.checkpoint".into(),
            )),
            (false, _) => PolicyRunner::build(spec, &self.config.channel, self.sites.len()),
        }
    }
}

/// One row of the aggregate / trade-off table.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub policy: String,
    pub w: f64,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_value: f64,
    pub mean_cost: f64,
    pub mean_error_loss: f64,
}

/// Evaluation output: per-episode records plus their aggregate.
#[derive(Debug, Clone)]
pub struct EvaluationResult {
    pub aggregate: Aggregate,
    pub episodes: Vec<EpisodeRecord>,
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var =
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate_records(policy: String, w: f64, episodes: &[EpisodeRecord]) -> Aggregate {
    let rewards: Vec<f64> = episodes.iter().map(|e| e.totals.reward).collect();
    let values: Vec<f64> = episodes.iter().map(|e| e.totals.data_value).collect();
    let costs: Vec<f64> = episodes.iter().map(|e| e.totals.energy_cost).collect();
    let losses: Vec<f64> = episodes.iter().map(|e| e.totals.mean_error_loss).collect();
    let (mean_reward, std_reward) = mean_and_std(&rewards);
    Aggregate {
        policy,
        w,
        mean_reward,
        std_reward,
        mean_value: mean_and_std(&values).0,
        mean_cost: mean_and_std(&costs).0,
        mean_error_loss: mean_and_std(&losses).0,
    }
}

/// Evaluate a frozen policy on the held-out scenarios at weight `w`.
/// Episodes run independently (in parallel under the default feature);
/// stream addressing makes the output identical for any worker count.
pub fn evaluate_runner(
    exp: &Experiment,
    runner_proto: &PolicyRunner,
    policy_name: &str,
    w: f64,
    mode: ExecMode,
) -> Result<EvaluationResult> {
    let env = exp.env(w);
    let offset = exp.eval_offset();
    let outcomes = map_indexed(mode, exp.config.eval_episodes, |k| {
        let idx = offset + k;
        let mut runner = runner_proto.clone();
        runner.set_learning(false);
        let streams = EpisodeStreams {
            master_seed: exp.config.master_seed,
            purpose: Purpose::Eval,
            episode: idx as u64,
        };
        run_episode(&env, &exp.scenarios[idx], idx, &mut runner, &streams)
    });
    let episodes: Vec<EpisodeRecord> = outcomes.into_iter().collect::<Result<_>>()?;
    let aggregate = aggregate_records(policy_name.to_string(), w, &episodes);
    Ok(EvaluationResult {
        aggregate,
        episodes,
    })
}

/// Evaluate the configured policy (loading its checkpoint when learned).
pub fn run_evaluation(exp: &Experiment, mode: ExecMode) -> Result<EvaluationResult> {
    let runner = exp.frozen_runner()?;
    evaluate_runner(exp, &runner, &exp.config.policy.name(), exp.config.w, mode)
}

/// Trade-off table over weights: one aggregate row per `(policy, w)`.
/// Analytic policies are evaluated directly; learned policies are retrained
/// at every weight before their frozen evaluation.
pub fn sweep_w(
    exp: &Experiment,
    w_values: &[f64],
    policies: &[PolicySpec],
    mode: ExecMode,
) -> Result<Vec<Aggregate>> {
    if w_values.iter().any(|&w| w < 0.0) {
        return Err(Error::Config("sweep weights must be >= 0".into()));
    }
    let mut rows = Vec::with_capacity(w_values.len() * policies.len());
    for spec in policies {
        for &w in w_values {
            let runner = if spec.is_learned() {
                let trained = train_policy(exp, spec, w, exp.config.master_seed)?;
                trained.runner
            } else {
                PolicyRunner::build(spec, &exp.config.channel, exp.sites.len())?
            };
            let result = evaluate_runner(exp, &runner, &spec.name(), w, mode)?;
            rows.push(result.aggregate);
        }
    }
    Ok(rows)
}
