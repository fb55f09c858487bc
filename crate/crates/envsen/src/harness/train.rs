//! Training loops for the learned policies.
//!
//! Training is sequential over episodes (agent tables are mutated between
//! episodes); it cycles through the training scenarios, which exclude the
//! held-out evaluation suffix.

use crate::core::{Error, Result};
use crate::harness::evaluate::Experiment;
use crate::harness::rngs::Purpose;
use crate::harness::runner::{run_episode, EpisodeStreams, PolicyRunner};
use crate::learn::Checkpoint;
use crate::policy::PolicySpec;

/// A trained, frozen policy with its learning curve.
pub struct TrainingResult {
    pub runner: PolicyRunner,
    /// Per-training-episode total reward (the value-minus-weighted-cost
    /// objective of each episode).
    pub curve: Vec<(usize, f64)>,
    pub checkpoint: Checkpoint,
}

/// Train a learned policy at weight `w` under `training_seed`, freeze it
/// and return it with its learning curve and checkpoint.
pub fn train_policy(
    exp: &Experiment,
    spec: &PolicySpec,
    w: f64,
    training_seed: u64,
) -> Result<TrainingResult> {
    if !spec.is_learned() {
        return Err(Error::Config(format!(
            "policy {:?} is not a learned policy",
            spec.name()
        )));
    }
    let scenarios = exp.train_scenarios();
    if scenarios.is_empty() {
        return Err(Error::Config(
            "no training scenarios: scenario_count must exceed eval_episodes".into(),
        ));
    }
    let env = exp.env(w);
    let mut runner = PolicyRunner::build(spec, &exp.config.channel, exp.sites.len())?;
    runner.set_learning(true);
    let mut curve = Vec::with_capacity(exp.config.train_episodes);
    for episode in 0..exp.config.train_episodes {
        let idx = episode % scenarios.len();
        let streams = EpisodeStreams {
            master_seed: training_seed,
            purpose: Purpose::Train,
            episode: episode as u64,
        };
        let record = run_episode(&env, &scenarios[idx], idx, &mut runner, &streams)?;
        curve.push((episode, record.totals.reward));
    }
    runner.set_learning(false);
    let checkpoint = runner.checkpoint(training_seed, w)?;
    Ok(TrainingResult {
        runner,
        curve,
        checkpoint,
    })
}
