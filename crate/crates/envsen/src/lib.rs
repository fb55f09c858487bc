//! Discrete-time multi-agent simulator and policy library for constrained
//! environmental IoT sensing.
//!
//! A field of sensors observes a spreading binary condition (e.g. an active
//! wildfire indicator). Each sensor independently decides whether to transmit
//! its current reading over a constrained shared channel to a central gateway,
//! which maintains a belief of the whole field. The crate provides:
//!
//! - [`core`]: shared domain types plus the error-loss, energy-cost and
//!   reward metrics,
//! - [`fire`]: a seeded wind-biased spread generator for ground-truth episodes,
//! - [`belief`]: gateway belief models and the data-value metric,
//! - [`channel`]: analytic bandwidth-limited / slotted-window random-access
//!   success models and a packet-level LoRa simulator,
//! - [`policy`]: provably-optimal baselines (centralized greedy, optimal
//!   transmit count/probability, mixed stochastic) and simple heuristics,
//! - [`learn`]: tabular independent Q-learning and Bernoulli policy-gradient
//!   agents with optional gateway feedback,
//! - [`harness`]: episode runner, evaluation, weight sweeps, CSV output and
//!   the configuration format used by the `envsen` binary.
//!
//! Evaluation episodes run data-parallel via rayon when the default
//! `parallel` feature is enabled; results are bit-identical to the
//! sequential fallback because every episode draws from its own
//! counter-derived random stream.

pub mod belief;
pub mod channel;
pub mod core;
pub mod fire;
pub mod harness;
pub mod learn;
pub mod policy;

pub use crate::core::{Error, Result};
