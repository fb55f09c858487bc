//! Ground-truth scenario generator: seeded wildfire episodes with monotone,
//! wind-biased probabilistic spread over a sensor layout.
//!
//! Spread is a probabilistic cellular automaton on the layout's neighbor
//! graph. A burning site stays burning for the rest of the episode; a
//! non-burning site ignites with probability
//! `1 - prod_j (1 - p_ij)` over its burning neighbors `j`, where
//! `p_ij = clamp(spread_rate * (1 + wind_gain * max(0, cos(theta_ij))), 0, 1)`
//! and `theta_ij` is the angle between the wind vector at `j` and the
//! displacement from `j` toward `i`. Wind is one (direction, speed) pair per
//! step, shared by all sites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::{Error, FieldState, NeighborGraph, Result, SensorSite, Vec2};

/// One step of the scenario's wind schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindStep {
    /// Direction the wind blows toward, degrees counter-clockwise from +x.
    pub direction_deg: f64,
    /// Speed in m/s.
    pub speed: f64,
}

impl WindStep {
    pub fn vector(&self) -> Vec2 {
        Vec2::from_polar(self.direction_deg, self.speed)
    }
}

/// A reproducible fire episode: ignition site, per-step wind schedule and
/// spread parameters. Serializes to JSON so episodes can be archived and
/// replayed, or imported from an external generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireScenario {
    /// Seed for the episode's ignition draws.
    pub seed: u64,
    /// Site id where the fire starts.
    pub ignition: usize,
    /// Wind per step; entry `t` applies at field time `t`.
    pub wind_schedule: Vec<WindStep>,
    /// Number of steps the scenario supports.
    pub horizon: u32,
    /// Base per-step ignition probability from one burning neighbor.
    pub spread_rate: f64,
    /// Multiplicative bias applied to downwind neighbors.
    pub wind_gain: f64,
    /// Adjacency radius in meters; `None` means 1.5x the layout's mean
    /// nearest-neighbor spacing.
    pub neighbor_radius: Option<f64>,
}

impl FireScenario {
    pub fn validate(&self, num_sites: usize) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidArgument("scenario horizon must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.spread_rate) {
            return Err(Error::InvalidArgument("spread_rate must be in [0, 1]".into()));
        }
        if !(self.wind_gain >= 0.0) {
            return Err(Error::InvalidArgument("wind_gain must be >= 0".into()));
        }
        if self.ignition >= num_sites {
            return Err(Error::UnknownSensor {
                id: self.ignition,
                count: num_sites,
            });
        }
        if self.wind_schedule.is_empty() {
            return Err(Error::InvalidArgument("wind_schedule must be non-empty".into()));
        }
        Ok(())
    }

    /// Wind at step `t`, clamped to the last scheduled entry.
    pub fn wind_at(&self, t: u32) -> WindStep {
        let idx = (t as usize).min(self.wind_schedule.len() - 1);
        self.wind_schedule[idx]
    }

    /// Field at t = 0: only the ignition site burns.
    pub fn initial_state(&self, num_sites: usize) -> Result<FieldState> {
        self.validate(num_sites)?;
        let mut fire = vec![false; num_sites];
        fire[self.ignition] = true;
        Ok(FieldState {
            t: 0,
            fire,
            wind: vec![self.wind_at(0).vector(); num_sites],
        })
    }

    /// Build the spread graph this scenario uses over the given layout.
    pub fn spread_graph(&self, sites: &[SensorSite]) -> Result<NeighborGraph> {
        match self.neighbor_radius {
            Some(r) => NeighborGraph::new(sites, r),
            None => NeighborGraph::with_default_radius(sites),
        }
    }

    /// RNG stream for the ignition draws of step `t`, derived from the
    /// scenario seed only, so trajectories are identical across policies
    /// and master seeds.
    pub fn step_rng(&self, t: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        rng
    }
}

/// Advance the field by one step. Burning sites stay burning; candidate
/// sites draw once against their combined ignition probability, in
/// ascending id order.
pub fn step_fire(
    state: &FieldState,
    scenario: &FireScenario,
    graph: &NeighborGraph,
    rng: &mut impl Rng,
) -> Result<FieldState> {
    if state.t >= scenario.horizon {
        return Err(Error::EpisodeOver {
            t: state.t,
            horizon: scenario.horizon,
        });
    }
    if graph.len() != state.fire.len() {
        return Err(Error::DimensionMismatch {
            expected: graph.len(),
            got: state.fire.len(),
        });
    }
    let next_t = state.t + 1;
    let mut next_fire = state.fire.clone();
    for i in 0..state.fire.len() {
        if state.fire[i] {
            continue;
        }
        let mut survival = 1.0;
        let mut has_burning_neighbor = false;
        for &(j, toward_i) in graph.neighbors(i) {
            if !state.fire[j] {
                continue;
            }
            has_burning_neighbor = true;
            let cos = state.wind[j].cos_angle(&toward_i);
            let p = (scenario.spread_rate * (1.0 + scenario.wind_gain * cos.max(0.0)))
                .clamp(0.0, 1.0);
            survival *= 1.0 - p;
        }
        if has_burning_neighbor && rng.random::<f64>() < 1.0 - survival {
            next_fire[i] = true;
        }
    }
    Ok(FieldState {
        t: next_t,
        fire: next_fire,
        wind: vec![scenario.wind_at(next_t).vector(); state.fire.len()],
    })
}

/// Run a whole scenario from ignition to its horizon, using the scenario's
/// own per-step rng streams. Returns the state at every t in `0..=horizon`.
pub fn run_scenario(scenario: &FireScenario, sites: &[SensorSite]) -> Result<Vec<FieldState>> {
    let graph = scenario.spread_graph(sites)?;
    let mut states = vec![scenario.initial_state(sites.len())?];
    for t in 0..scenario.horizon {
        let mut rng = scenario.step_rng(t);
        let next = step_fire(states.last().unwrap(), scenario, &graph, &mut rng)?;
        states.push(next);
    }
    Ok(states)
}

/// Parameter ranges for scenario generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub horizon: u32,
    pub spread_rate: f64,
    pub wind_gain: f64,
    pub neighbor_radius: Option<f64>,
    /// Uniform range for the initial wind speed, m/s.
    pub wind_speed_range: (f64, f64),
    /// Std-dev of the per-step random walk on wind direction, degrees.
    pub wind_drift_deg: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            horizon: 60,
            spread_rate: 0.3,
            wind_gain: 1.5,
            neighbor_radius: None,
            wind_speed_range: (1.0, 8.0),
            wind_drift_deg: 20.0,
        }
    }
}

/// Generate `count` scenarios over the layout, differing in ignition site
/// and wind schedule. Deterministic given `base_seed`: scenario `k` draws
/// from stream `k` of a generator seeded with `base_seed`.
pub fn generate_scenarios(
    count: usize,
    base_seed: u64,
    sites: &[SensorSite],
    params: &ScenarioParams,
) -> Result<Vec<FireScenario>> {
    if count == 0 {
        return Err(Error::InvalidArgument("scenario count must be >= 1".into()));
    }
    if sites.is_empty() {
        return Err(Error::InvalidArgument("site layout must be non-empty".into()));
    }
    let (lo, hi) = params.wind_speed_range;
    if !(lo >= 0.0 && hi >= lo) {
        return Err(Error::InvalidArgument("invalid wind speed range".into()));
    }
    let mut scenarios = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(k as u64);
        let ignition = rng.random_range(0..sites.len());
        let mut direction: f64 = rng.random_range(0.0..360.0);
        let mut speed = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let mut wind_schedule = Vec::with_capacity(params.horizon as usize + 1);
        for _ in 0..=params.horizon {
            wind_schedule.push(WindStep {
                direction_deg: direction.rem_euclid(360.0),
                speed,
            });
            direction += rng.random_range(-1.0..1.0) * params.wind_drift_deg;
            if hi > lo {
                let jitter = rng.random_range(-0.5..0.5);
                speed = (speed + jitter).clamp(lo, hi);
            }
        }
        scenarios.push(FireScenario {
            seed: rng.random::<u64>(),
            ignition,
            wind_schedule,
            horizon: params.horizon,
            spread_rate: params.spread_rate,
            wind_gain: params.wind_gain,
            neighbor_radius: params.neighbor_radius,
        });
    }
    Ok(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::SensorSite;

    fn line_sites(n: usize, spacing: f64) -> Vec<SensorSite> {
        (0..n)
            .map(|i| SensorSite::new(i, Vec2::new(i as f64 * spacing, 0.0)))
            .collect()
    }

    fn constant_wind(horizon: u32, direction_deg: f64, speed: f64) -> Vec<WindStep> {
        vec![
            WindStep {
                direction_deg,
                speed
            };
            horizon as usize + 1
        ]
    }

    fn scenario(horizon: u32, spread_rate: f64, wind_gain: f64) -> FireScenario {
        FireScenario {
            seed: 42,
            ignition: 0,
            wind_schedule: constant_wind(horizon, 0.0, 3.0),
            horizon,
            spread_rate,
            wind_gain,
            neighbor_radius: Some(12.0),
        }
    }

    #[test]
    fn no_burning_sites_stay_clear() {
        let sites = line_sites(4, 10.0);
        let sc = scenario(5, 0.9, 0.0);
        let graph = sc.spread_graph(&sites).unwrap();
        let state = FieldState {
            t: 0,
            fire: vec![false; 4],
            wind: vec![Vec2::ZERO; 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = step_fire(&state, &sc, &graph, &mut rng).unwrap();
        assert!(next.fire.iter().all(|&b| !b));
    }

    #[test]
    fn all_burning_stays_burning() {
        let sites = line_sites(4, 10.0);
        let sc = scenario(5, 0.2, 0.0);
        let graph = sc.spread_graph(&sites).unwrap();
        let state = FieldState {
            t: 0,
            fire: vec![true; 4],
            wind: vec![Vec2::ZERO; 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = step_fire(&state, &sc, &graph, &mut rng).unwrap();
        assert!(next.fire.iter().all(|&b| b));
    }

    #[test]
    fn stepping_past_horizon_fails() {
        let sites = line_sites(3, 10.0);
        let sc = scenario(1, 0.2, 0.0);
        let graph = sc.spread_graph(&sites).unwrap();
        let state = FieldState {
            t: 1,
            fire: vec![true, false, false],
            wind: vec![Vec2::ZERO; 3],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            step_fire(&state, &sc, &graph, &mut rng),
            Err(Error::EpisodeOver { .. })
        ));
    }

    // Monte-Carlo oracle: with wind_gain = 0 and k burning neighbors at
    // base rate p, a site ignites with probability 1 - (1 - p)^k.
    #[test]
    fn ignition_probability_matches_closed_form() {
        let k = 3;
        let p = 0.2;
        // Center site surrounded by k burning neighbors within radius.
        let mut sites = vec![SensorSite::new(0, Vec2::new(0.0, 0.0))];
        for j in 0..k {
            let angle = j as f64 * std::f64::consts::TAU / k as f64;
            sites.push(SensorSite::new(
                j + 1,
                Vec2::new(10.0 * angle.cos(), 10.0 * angle.sin()),
            ));
        }
        let sc = FireScenario {
            seed: 9,
            ignition: 1,
            wind_schedule: constant_wind(1, 0.0, 3.0),
            horizon: 1,
            spread_rate: p,
            wind_gain: 0.0,
            neighbor_radius: Some(12.0),
        };
        let graph = sc.spread_graph(&sites).unwrap();
        let mut fire = vec![true; k + 1];
        fire[0] = false;
        let state = FieldState {
            t: 0,
            fire,
            wind: vec![Vec2::ZERO; k + 1],
        };

        let trials = 200_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut ignited = 0u32;
        for _ in 0..trials {
            let next = step_fire(&state, &sc, &graph, &mut rng).unwrap();
            if next.fire[0] {
                ignited += 1;
            }
        }
        let expected = 1.0 - (1.0 - p).powi(k as i32);
        let observed = ignited as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (observed - expected).abs() < 3.0 * sigma,
            "observed {observed}, expected {expected} (3 sigma = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn monotone_burning_and_locality() {
        let sites = line_sites(12, 10.0);
        let sc = scenario(12, 0.5, 1.0);
        let states = run_scenario(&sc, &sites).unwrap();
        let graph = sc.spread_graph(&sites).unwrap();
        for w in states.windows(2) {
            for i in 0..sites.len() {
                // monotone: burning never reverts
                assert!(!w[0].fire[i] || w[1].fire[i]);
                // locality: a fresh ignition needs a burning neighbor
                if w[1].fire[i] && !w[0].fire[i] {
                    assert!(graph.neighbors(i).iter().any(|&(j, _)| w[0].fire[j]));
                }
            }
        }
    }

    #[test]
    fn trajectories_are_deterministic() {
        let sites = line_sites(10, 10.0);
        let sc = scenario(8, 0.4, 1.0);
        let a = run_scenario(&sc, &sites).unwrap();
        let b = run_scenario(&sc, &sites).unwrap();
        assert_eq!(a, b);
    }

    // With wind blowing +x, the burned area's mean x-coordinate at the
    // horizon exceeds the wind-free mean (one-sided, 3 sigma over many
    // episodes from a central ignition).
    #[test]
    fn wind_bias_shifts_burned_area_downwind() {
        // 9x9 lattice, ignition in the center.
        let mut sites = Vec::new();
        for y in 0..9 {
            for x in 0..9 {
                sites.push(SensorSite::new(y * 9 + x, Vec2::new(x as f64 * 10.0, y as f64 * 10.0)));
            }
        }
        let center = 4 * 9 + 4;
        let episodes = 10_000;
        let mut mean_x = |wind_gain: f64, seed_base: u64| -> (f64, f64) {
            let mut samples = Vec::with_capacity(episodes);
            for e in 0..episodes {
                let sc = FireScenario {
                    seed: seed_base + e as u64,
                    ignition: center,
                    wind_schedule: constant_wind(6, 0.0, 5.0),
                    horizon: 6,
                    spread_rate: 0.25,
                    wind_gain,
                    neighbor_radius: Some(12.0),
                };
                let states = run_scenario(&sc, &sites).unwrap();
                let last = states.last().unwrap();
                let (mut sum, mut n) = (0.0, 0u32);
                for (i, &b) in last.fire.iter().enumerate() {
                    if b {
                        sum += sites[i].position.x;
                        n += 1;
                    }
                }
                samples.push(sum / n as f64);
            }
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / (samples.len() - 1) as f64;
            (mean, var / samples.len() as f64)
        };
        let (m_wind, v_wind) = mean_x(2.0, 1000);
        let (m_calm, v_calm) = mean_x(0.0, 2000);
        let sigma = (v_wind + v_calm).sqrt();
        assert!(
            m_wind - m_calm > 3.0 * sigma,
            "downwind shift {} not significant (3 sigma = {})",
            m_wind - m_calm,
            3.0 * sigma
        );
    }

    #[test]
    fn generate_is_deterministic_and_distinct() {
        let sites = line_sites(30, 10.0);
        let params = ScenarioParams::default();
        let a = generate_scenarios(200, 5, &sites, &params).unwrap();
        let b = generate_scenarios(200, 5, &sites, &params).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a, b);
        // scenarios 0 and 1 differ in ignition or wind schedule
        let s0 = serde_json::to_string(&a[0]).unwrap();
        let s1 = serde_json::to_string(&a[1]).unwrap();
        assert_ne!(s0, s1);
    }

    #[test]
    fn generate_rejects_bad_args() {
        let params = ScenarioParams::default();
        assert!(generate_scenarios(0, 5, &line_sites(3, 10.0), &params).is_err());
        assert!(generate_scenarios(2, 5, &[], &params).is_err());
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let sc = scenario(4, 0.3, 1.0);
        let json = serde_json::to_string(&sc).unwrap();
        let back: FireScenario = serde_json::from_str(&json).unwrap();
        assert_eq!(sc, back);
    }
}
