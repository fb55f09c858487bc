//! Shared domain types and the loss/cost/reward metrics.
//!
//! Everything here is an immutable value object; the operations are pure
//! functions and safe to call from parallel episode workers.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown sensor id {id} (layout has {count} sites)")]
    UnknownSensor { id: usize, count: usize },
    #[error("no value supplied for attempted sensor {id}")]
    MissingValue { id: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("episode over: step {t} reached horizon {horizon}")]
    EpisodeOver { t: u32, horizon: u32 },
    #[error("per-sensor costs must be equal for this policy; use brute force or a stochastic policy")]
    UnequalCosts,
    #[error("instance too large for exhaustive search: {n} sensors (max {max})")]
    TooLarge { n: usize, max: usize },
    #[error("non-finite reward passed to a learning update")]
    NonFiniteReward,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// 2-D vector in meters (positions) or m/s (wind).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Vector with the given magnitude pointing `direction_deg` degrees
    /// counter-clockwise from the +x axis.
    pub fn from_polar(direction_deg: f64, magnitude: f64) -> Self {
        let rad = direction_deg.to_radians();
        Vec2 {
            x: magnitude * rad.cos(),
            y: magnitude * rad.sin(),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(&self, other: &Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Cosine of the angle between two vectors; 0 if either is zero-length.
    pub fn cos_angle(&self, other: &Vec2) -> f64 {
        let denom = self.magnitude() * other.magnitude();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }
}

/// One sensor site: index, position, transmission cost and per-site
/// importance weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSite {
    pub id: usize,
    pub position: Vec2,
    /// Energy units consumed per transmission attempt.
    pub energy_cost: f64,
    /// Importance of correcting the belief at this site (default 1).
    pub data_value_weight: f64,
}

impl SensorSite {
    pub fn new(id: usize, position: Vec2) -> Self {
        SensorSite {
            id,
            position,
            energy_cost: 1.0,
            data_value_weight: 1.0,
        }
    }
}

/// Check the site-list invariants: contiguous ids, positive costs, finite
/// positions and non-negative weights.
pub fn validate_sites(sites: &[SensorSite]) -> Result<()> {
    for (i, s) in sites.iter().enumerate() {
        if s.id != i {
            return Err(Error::InvalidArgument(format!(
                "site ids must be contiguous from 0; found id {} at index {i}",
                s.id
            )));
        }
        if !(s.energy_cost > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "site {i}: energy_cost must be > 0"
            )));
        }
        if !s.position.x.is_finite() || !s.position.y.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "site {i}: position must be finite"
            )));
        }
        if !(s.data_value_weight >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "site {i}: data_value_weight must be >= 0"
            )));
        }
    }
    Ok(())
}

/// Ground-truth state of the monitored field at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: u32,
    /// Per-site binary condition (true = active).
    pub fire: Vec<bool>,
    /// Per-site wind vector in m/s.
    pub wind: Vec<Vec2>,
}

impl FieldState {
    pub fn len(&self) -> usize {
        self.fire.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fire.is_empty()
    }

    pub fn burning_count(&self) -> usize {
        self.fire.iter().filter(|&&b| b).count()
    }
}

/// Gateway belief at one time step.
///
/// `belief` incorporates every report received through step `t`;
/// `pre_update` is the belief the update rule produced from data through
/// `t - 1` only, and is the baseline against which data value is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub t: u32,
    pub belief: Vec<bool>,
    pub pre_update: Vec<bool>,
}

impl BeliefState {
    /// All-clear initial belief at t = 0.
    pub fn initial(num_sites: usize) -> Self {
        BeliefState {
            t: 0,
            belief: vec![false; num_sites],
            pre_update: vec![false; num_sites],
        }
    }

    pub fn len(&self) -> usize {
        self.belief.len()
    }

    pub fn is_empty(&self) -> bool {
        self.belief.is_empty()
    }
}

/// Outcome of one transmission round: who attempted, and which of those
/// attempts were received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionRound {
    attempted: BTreeSet<usize>,
    succeeded: BTreeSet<usize>,
}

impl TransmissionRound {
    /// Build a round, enforcing `succeeded ⊆ attempted`.
    pub fn new(attempted: BTreeSet<usize>, succeeded: BTreeSet<usize>) -> Result<Self> {
        if !succeeded.is_subset(&attempted) {
            return Err(Error::InvalidArgument(
                "succeeded set must be a subset of attempted".into(),
            ));
        }
        Ok(TransmissionRound {
            attempted,
            succeeded,
        })
    }

    pub fn empty() -> Self {
        TransmissionRound {
            attempted: BTreeSet::new(),
            succeeded: BTreeSet::new(),
        }
    }

    pub fn attempted(&self) -> &BTreeSet<usize> {
        &self.attempted
    }

    pub fn succeeded(&self) -> &BTreeSet<usize> {
        &self.succeeded
    }

    /// Per-attempt outcome indicator: true iff `id` attempted and was received.
    pub fn outcome(&self, id: usize) -> bool {
        self.succeeded.contains(&id)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Weighted Hamming distance between the true field and the gateway belief:
/// sum over sites of `data_value_weight` where the bits disagree.
pub fn error_loss(truth: &FieldState, belief: &BeliefState, sites: &[SensorSite]) -> Result<f64> {
    check_len(sites.len(), truth.fire.len())?;
    check_len(sites.len(), belief.belief.len())?;
    Ok(weighted_mismatch(&truth.fire, &belief.belief, sites))
}

/// Weighted mismatch count between two binary vectors. Callers must have
/// checked lengths against `sites`.
pub(crate) fn weighted_mismatch(a: &[bool], b: &[bool], sites: &[SensorSite]) -> f64 {
    let mut total = 0.0;
    for (i, site) in sites.iter().enumerate() {
        if a[i] != b[i] {
            total += site.data_value_weight;
        }
    }
    total
}

/// Total energy spent by a set of transmission attempts: the sum of each
/// attempting site's per-attempt cost. The empty set costs 0.
pub fn energy_cost(attempted: &BTreeSet<usize>, sites: &[SensorSite]) -> Result<f64> {
    let mut total = 0.0;
    for &id in attempted {
        let site = sites.get(id).ok_or(Error::UnknownSensor {
            id,
            count: sites.len(),
        })?;
        total += site.energy_cost;
    }
    Ok(total)
}

/// Realized reward of one round: for every attempting sensor,
/// `outcome * value - w * cost`, summed in ascending id order so the total
/// decomposes exactly into per-agent local rewards.
pub fn step_reward(
    round: &TransmissionRound,
    values: &[f64],
    sites: &[SensorSite],
    w: f64,
) -> Result<f64> {
    if w < 0.0 {
        return Err(Error::InvalidArgument("w must be >= 0".into()));
    }
    let mut total = 0.0;
    for &id in round.attempted() {
        let site = sites.get(id).ok_or(Error::UnknownSensor {
            id,
            count: sites.len(),
        })?;
        let value = *values.get(id).ok_or(Error::MissingValue { id })?;
        let outcome = if round.outcome(id) { 1.0 } else { 0.0 };
        total += outcome * value - w * site.energy_cost;
    }
    Ok(total)
}

/// Precomputed spatial adjacency of a site layout: for each site, the
/// neighbors within `radius` plus the unit displacement from each neighbor
/// toward the site (used for downwind spread bias).
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    radius: f64,
    /// `neighbors[i]` lists `(j, unit vector from j to i)`.
    neighbors: Vec<Vec<(usize, Vec2)>>,
}

impl NeighborGraph {
    pub fn new(sites: &[SensorSite], radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument("neighbor radius must be >= 0".into()));
        }
        let mut neighbors = vec![Vec::new(); sites.len()];
        for i in 0..sites.len() {
            for j in 0..sites.len() {
                if i == j {
                    continue;
                }
                let d = sites[i].position.distance(&sites[j].position);
                if d <= radius && d > 0.0 {
                    let unit = Vec2::new(
                        (sites[i].position.x - sites[j].position.x) / d,
                        (sites[i].position.y - sites[j].position.y) / d,
                    );
                    neighbors[i].push((j, unit));
                }
            }
        }
        Ok(NeighborGraph { radius, neighbors })
    }

    /// Graph with the default radius: 1.5x the mean nearest-neighbor spacing
    /// of the layout. Requires at least two sites.
    pub fn with_default_radius(sites: &[SensorSite]) -> Result<Self> {
        let spacing = mean_nearest_neighbor_spacing(sites).ok_or_else(|| {
            Error::InvalidArgument("default neighbor radius needs at least 2 sites".into())
        })?;
        Self::new(sites, 1.5 * spacing)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighbors of site `i` as `(j, unit vector j -> i)`.
    pub fn neighbors(&self, i: usize) -> &[(usize, Vec2)] {
        &self.neighbors[i]
    }
}

/// Mean distance from each site to its nearest neighbor; `None` for fewer
/// than two sites.
pub fn mean_nearest_neighbor_spacing(sites: &[SensorSite]) -> Option<f64> {
    if sites.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for i in 0..sites.len() {
        let mut best = f64::INFINITY;
        for j in 0..sites.len() {
            if i != j {
                best = best.min(sites[i].position.distance(&sites[j].position));
            }
        }
        total += best;
    }
    Some(total / sites.len() as f64)
}
