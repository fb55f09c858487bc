//! Experiment orchestration: configuration, the episode runner, frozen
//! evaluation, training loops, weight sweeps and CSV output.

pub mod config;
pub mod csvio;
pub mod evaluate;
pub mod exec;
pub mod rngs;
pub mod runner;
pub mod train;

pub use config::{ChannelConfig, ExperimentConfig};
pub use evaluate::{evaluate_runner, run_evaluation, sweep_w, Aggregate, EvaluationResult, Experiment};
pub use exec::ExecMode;
pub use rngs::{step_rng, Lane, Purpose};
pub use runner::{
    run_episode, run_episode_observed, EpisodeEnv, EpisodeRecord, EpisodeStreams, EpisodeTotals,
    PolicyRunner, StepRecord, StepTrace,
};
pub use train::{train_policy, TrainingResult};
