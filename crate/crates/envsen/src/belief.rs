//! Gateway belief models, the step-wise update, model loss and the
//! data-value metric.
//!
//! The gateway extrapolates its belief one step forward without any new
//! reports (the *pre-update* belief `z_t`), then overwrites the bits of the
//! sites whose reports arrived. Data value measures how much a report would
//! reduce the error loss relative to `z_t`: in the binary setting a report
//! is worth the site's weight iff it corrects the pre-update bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::core::{
    weighted_mismatch, BeliefState, Error, FieldState, NeighborGraph, Result, SensorSite,
};

/// How the gateway extrapolates its belief between steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeliefModel {
    /// Hold the last known bit. Sensors can mirror this from their own
    /// transmission history, so no gateway broadcast is needed.
    Persistence,
    /// Hold the last known bit, then flip a site to burning when at least
    /// `threshold` of its neighbors are believed burning. Requires the
    /// gateway to broadcast pre-update bits to the sensors.
    NeighborPropagation { threshold: f64 },
}

impl Default for BeliefModel {
    fn default() -> Self {
        BeliefModel::Persistence
    }
}

impl BeliefModel {
    pub fn validate(&self) -> Result<()> {
        if let BeliefModel::NeighborPropagation { threshold } = self {
            if !(0.0..=1.0).contains(threshold) {
                return Err(Error::InvalidArgument(
                    "propagation threshold must be in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    /// The belief extrapolated one step forward with no new reports: the
    /// `z` vector against which data values are measured.
    pub fn pre_update(&self, belief: &BeliefState, graph: &NeighborGraph) -> Vec<bool> {
        match *self {
            BeliefModel::Persistence => belief.belief.clone(),
            BeliefModel::NeighborPropagation { threshold } => {
                let prior = &belief.belief;
                let mut next = prior.clone();
                for i in 0..prior.len() {
                    if next[i] {
                        continue;
                    }
                    let neighbors = graph.neighbors(i);
                    let burning = neighbors.iter().filter(|&&(j, _)| prior[j]).count();
                    let fraction = if neighbors.is_empty() {
                        0.0
                    } else {
                        burning as f64 / neighbors.len() as f64
                    };
                    if fraction >= threshold {
                        next[i] = true;
                    }
                }
                next
            }
        }
    }
}

/// Advance the belief one step: extrapolate to the pre-update vector, then
/// overwrite the reported sites with their reported bits. The returned
/// state is at `belief.t + 1`.
pub fn advance_belief(
    model: &BeliefModel,
    belief: &BeliefState,
    received: &BTreeMap<usize, bool>,
    graph: &NeighborGraph,
) -> Result<BeliefState> {
    let n = belief.len();
    if let Some((&id, _)) = received.iter().find(|(&id, _)| id >= n) {
        return Err(Error::UnknownSensor { id, count: n });
    }
    let pre_update = model.pre_update(belief, graph);
    let next = incorporate_reports(&pre_update, received, belief.t + 1);
    Ok(next)
}

/// Overwrite the pre-update vector with reported bits. Callers must have
/// validated the report keys.
pub fn incorporate_reports(
    pre_update: &[bool],
    received: &BTreeMap<usize, bool>,
    t: u32,
) -> BeliefState {
    let mut bits = pre_update.to_vec();
    for (&id, &bit) in received {
        bits[id] = bit;
    }
    BeliefState {
        t,
        belief: bits,
        pre_update: pre_update.to_vec(),
    }
}

/// Error loss of the belief extrapolated without the current step's data:
/// the weighted mismatch between the truth and `pre_update`.
pub fn model_loss(truth: &FieldState, belief: &BeliefState, sites: &[SensorSite]) -> Result<f64> {
    if sites.len() != truth.fire.len() {
        return Err(Error::DimensionMismatch {
            expected: sites.len(),
            got: truth.fire.len(),
        });
    }
    if sites.len() != belief.pre_update.len() {
        return Err(Error::DimensionMismatch {
            expected: sites.len(),
            got: belief.pre_update.len(),
        });
    }
    Ok(weighted_mismatch(&truth.fire, &belief.pre_update, sites))
}

/// Data value of sensor `i`'s report at the current step: the site weight
/// if the true bit differs from the pre-update belief, else 0.
pub fn data_value(i: usize, truth: &FieldState, belief: &BeliefState, sites: &[SensorSite]) -> f64 {
    if truth.fire[i] != belief.pre_update[i] {
        sites[i].data_value_weight
    } else {
        0.0
    }
}

/// Sum of per-sensor data values over a set of ids. For the binary
/// overwrite update each report corrects only its own site, so the sum is
/// exact rather than an approximation.
pub fn data_value_set(
    ids: impl IntoIterator<Item = usize>,
    truth: &FieldState,
    belief: &BeliefState,
    sites: &[SensorSite],
) -> f64 {
    ids.into_iter()
        .map(|i| data_value(i, truth, belief, sites))
        .sum()
}

/// Per-site data values for the whole layout.
pub fn data_values(truth: &FieldState, belief: &BeliefState, sites: &[SensorSite]) -> Vec<f64> {
    (0..sites.len())
        .map(|i| data_value(i, truth, belief, sites))
        .collect()
}
