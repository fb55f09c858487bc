//! Experiment configuration: a single JSON document with explicit seeds
//! everywhere, covering the layout, scenario generation, channel, belief
//! model, policy and evaluation settings.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::BeliefModel;
use crate::channel::{
    resolve_round_analytic, resolve_round_lora, AnalyticChannel, AnalyticKind, LoraChannel,
};
use crate::core::{Error, Result, SensorSite, TransmissionRound, Vec2};
use crate::fire::{generate_scenarios, FireScenario, ScenarioParams};
use crate::policy::PolicySpec;

/// Channel block of the experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelConfig {
    BandwidthLimited {
        num_channels: u32,
        capacity: u32,
        epsilon: f64,
    },
    Aloha {
        num_channels: u32,
        window_ratio: f64,
    },
    Lora(LoraChannel),
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelConfig::BandwidthLimited { .. } | ChannelConfig::Aloha { .. } => {
                self.analytic().unwrap().validate()
            }
            ChannelConfig::Lora(lora) => lora.validate(),
        }
    }

    pub fn analytic(&self) -> Option<AnalyticChannel> {
        match *self {
            ChannelConfig::BandwidthLimited {
                num_channels,
                capacity,
                epsilon,
            } => Some(AnalyticChannel {
                kind: AnalyticKind::BandwidthLimited { capacity, epsilon },
                num_channels,
            }),
            ChannelConfig::Aloha {
                num_channels,
                window_ratio,
            } => Some(AnalyticChannel {
                kind: AnalyticKind::Aloha { window_ratio },
                num_channels,
            }),
            ChannelConfig::Lora(_) => None,
        }
    }

    /// The single-channel curve equivalent to the whole bank: capacity and
    /// window scale with the channel count. Analytic policies are computed
    /// against this pooled curve; the packet simulator has no analytic
    /// curve.
    pub fn pooled_curve(&self) -> Option<AnalyticKind> {
        match *self {
            ChannelConfig::BandwidthLimited {
                num_channels,
                capacity,
                epsilon,
            } => Some(AnalyticKind::BandwidthLimited {
                capacity: capacity * num_channels,
                epsilon,
            }),
            ChannelConfig::Aloha {
                num_channels,
                window_ratio,
            } => Some(AnalyticKind::Aloha {
                window_ratio: window_ratio * num_channels as f64,
            }),
            ChannelConfig::Lora(_) => None,
        }
    }

    /// Packets-per-step budget of the bank, used for utilization feedback.
    pub fn capacity_units(&self) -> f64 {
        match *self {
            ChannelConfig::BandwidthLimited {
                num_channels,
                capacity,
                ..
            } => num_channels as f64 * capacity as f64,
            ChannelConfig::Aloha {
                num_channels,
                window_ratio,
            } => num_channels as f64 * window_ratio / 2.0,
            ChannelConfig::Lora(ref lora) => {
                lora.num_channels as f64 * lora.window / lora.packet_airtime
            }
        }
    }

    /// Resolve one round on this channel.
    pub fn resolve(
        &self,
        attempted: &BTreeSet<usize>,
        sites: &[SensorSite],
        rng: &mut impl Rng,
    ) -> Result<TransmissionRound> {
        match self {
            ChannelConfig::BandwidthLimited { .. } | ChannelConfig::Aloha { .. } => {
                resolve_round_analytic(attempted, &self.analytic().unwrap(), rng)
            }
            ChannelConfig::Lora(lora) => resolve_round_lora(attempted, sites, lora, rng),
        }
    }
}

impl Default for ChannelConfig {
    /// Four channels, capacity 2, base failure rate 0.001.
    fn default() -> Self {
        ChannelConfig::BandwidthLimited {
            num_channels: 4,
            capacity: 2,
            epsilon: 0.001,
        }
    }
}

/// Full experiment description. Every random draw in a run derives from one
/// of the three seeds here, so a config file pins a run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub num_sensors: usize,
    pub layout_seed: u64,
    /// Side of the square deployment area, meters; the gateway sits at the
    /// center.
    pub area_size: f64,
    /// Per-transmission energy cost applied to every site.
    pub energy_cost: f64,
    /// Data-value weight applied to every site.
    pub data_value_weight: f64,
    /// Episode length in steps.
    pub horizon: u32,
    pub scenario_count: usize,
    pub scenario_seed: u64,
    pub spread_rate: f64,
    pub wind_gain: f64,
    pub neighbor_radius: Option<f64>,
    pub wind_speed_range: (f64, f64),
    pub wind_drift_deg: f64,
    /// Optional path to a JSON list of scenarios to replay instead of
    /// generating them.
    pub scenario_file: Option<String>,
    pub channel: ChannelConfig,
    pub belief: BeliefModel,
    pub policy: PolicySpec,
    /// Weight trading energy cost against data value.
    pub w: f64,
    /// Held-out episodes used for evaluation (the last of the scenario
    /// list).
    pub eval_episodes: usize,
    pub train_episodes: usize,
    pub master_seed: u64,
    /// Weights visited by the `sweep` subcommand.
    pub w_sweep: Vec<f64>,
    /// Policies visited by the `sweep` subcommand.
    pub sweep_policies: Vec<PolicySpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_sensors: 200,
            layout_seed: 7,
            area_size: 2000.0,
            energy_cost: 1.0,
            data_value_weight: 1.0,
            horizon: 60,
            scenario_count: 200,
            scenario_seed: 11,
            spread_rate: 0.3,
            wind_gain: 1.5,
            neighbor_radius: None,
            wind_speed_range: (1.0, 8.0),
            wind_drift_deg: 20.0,
            scenario_file: None,
            channel: ChannelConfig::default(),
            belief: BeliefModel::Persistence,
            policy: PolicySpec::Heuristic,
            w: 0.2,
            eval_episodes: 30,
            train_episodes: 500,
            master_seed: 1,
            w_sweep: vec![0.05, 0.1, 0.2, 0.4, 0.8],
            sweep_policies: vec![
                PolicySpec::StochasticUniform,
                PolicySpec::Heuristic,
                PolicySpec::RandomP { p: 0.3 },
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_sensors == 0 {
            return Err(Error::Config("num_sensors must be >= 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.w < 0.0 {
            return Err(Error::Config("w must be >= 0".into()));
        }
        if !(self.energy_cost > 0.0) {
            return Err(Error::Config("energy_cost must be > 0".into()));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be >= 1".into()));
        }
        if self.scenario_count < self.eval_episodes {
            return Err(Error::Config(format!(
                "scenario_count ({}) must cover eval_episodes ({})",
                self.scenario_count, self.eval_episodes
            )));
        }
        self.channel.validate()?;
        self.belief.validate()?;
        if let PolicySpec::RandomP { p } = self.policy {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config("random_p probability must be in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Gateway position: the center of the deployment square.
    pub fn gateway_position(&self) -> Vec2 {
        Vec2::new(self.area_size / 2.0, self.area_size / 2.0)
    }

    /// Sensor layout: uniform-random positions in the deployment square,
    /// deterministic in `layout_seed`.
    pub fn sites(&self) -> Vec<SensorSite> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.layout_seed);
        (0..self.num_sensors)
            .map(|id| {
                let position = Vec2::new(
                    rng.random_range(0.0..self.area_size),
                    rng.random_range(0.0..self.area_size),
                );
                SensorSite {
                    id,
                    position,
                    energy_cost: self.energy_cost,
                    data_value_weight: self.data_value_weight,
                }
            })
            .collect()
    }

    pub fn scenario_params(&self) -> ScenarioParams {
        ScenarioParams {
            horizon: self.horizon,
            spread_rate: self.spread_rate,
            wind_gain: self.wind_gain,
            neighbor_radius: self.neighbor_radius,
            wind_speed_range: self.wind_speed_range,
            wind_drift_deg: self.wind_drift_deg,
        }
    }

    /// Scenario list: loaded from `scenario_file` when set, otherwise
    /// generated from `scenario_seed`. Every scenario must support the
    /// configured horizon.
    pub fn scenarios(&self, sites: &[SensorSite]) -> Result<Vec<FireScenario>> {
        let scenarios = match &self.scenario_file {
            Some(path) => {
                let json = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read scenario file {path}: {e}"))
                })?;
                serde_json::from_str::<Vec<FireScenario>>(&json)?
            }
            None => generate_scenarios(
                self.scenario_count,
                self.scenario_seed,
                sites,
                &self.scenario_params(),
            )?,
        };
        if scenarios.is_empty() {
            return Err(Error::Config("no scenarios configured".into()));
        }
        for (k, sc) in scenarios.iter().enumerate() {
            sc.validate(sites.len())?;
            if sc.horizon < self.horizon {
                return Err(Error::Config(format!(
                    "scenario {k} horizon {} is shorter than the configured horizon {}",
                    sc.horizon, self.horizon
                )));
            }
        }
        Ok(scenarios)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply `key.path=value` overrides (values parsed as JSON, falling
    /// back to a plain string) and re-validate.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        for entry in overrides {
            let (path, raw) = entry.split_once('=').ok_or_else(|| {
                Error::Config(format!("override {entry:?} must look like key.path=value"))
            })?;
            let parsed: serde_json::Value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            let segments: Vec<&str> = path.split('.').collect();
            set_json_path(&mut value, path, &segments, parsed)?;
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set_json_path(
    node: &mut serde_json::Value,
    full_path: &str,
    segments: &[&str],
    parsed: serde_json::Value,
) -> Result<()> {
    let obj = node.as_object_mut().ok_or_else(|| {
        Error::Config(format!(
            "override path {full_path:?} does not address an object"
        ))
    })?;
    match segments {
        [] => Err(Error::Config(format!("empty override path {full_path:?}"))),
        [last] => {
            obj.insert(last.to_string(), parsed);
            Ok(())
        }
        [head, rest @ ..] => {
            let child = obj
                .entry(head.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
            set_json_path(child, full_path, rest, parsed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.num_sensors, 200);
        assert_eq!(cfg.scenario_count, 200);
        assert_eq!(cfg.eval_episodes, 30);
        assert_eq!(cfg.w, 0.2);
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn layout_is_deterministic_and_in_bounds() {
        let cfg = ExperimentConfig::default();
        let a = cfg.sites();
        let b = cfg.sites();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        for s in &a {
            assert!(s.position.x >= 0.0 && s.position.x < cfg.area_size);
            assert!(s.position.y >= 0.0 && s.position.y < cfg.area_size);
        }
    }

    #[test]
    fn pooled_curve_scales_with_channel_count() {
        let channel = ChannelConfig::default();
        match channel.pooled_curve().unwrap() {
            AnalyticKind::BandwidthLimited { capacity, epsilon } => {
                assert_eq!(capacity, 8);
                assert_eq!(epsilon, 0.001);
            }
            _ => panic!("expected bandwidth-limited"),
        }
        assert_eq!(channel.capacity_units(), 8.0);
        let lora = ChannelConfig::Lora(LoraChannel::with_gateway(Vec2::ZERO));
        assert!(lora.pooled_curve().is_none());
    }

    #[test]
    fn overrides_apply_nested_paths() {
        let cfg = ExperimentConfig::default();
        let out = cfg
            .with_overrides(&[
                "w=0.4".into(),
                "channel.capacity=3".into(),
                "policy.kind=\"random_p\"".into(),
                "policy.p=0.25".into(),
            ])
            .unwrap();
        assert_eq!(out.w, 0.4);
        assert!(matches!(
            out.channel,
            ChannelConfig::BandwidthLimited { capacity: 3, .. }
        ));
        assert_eq!(out.policy, PolicySpec::RandomP { p: 0.25 });
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.eval_episodes = 300;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.w = -0.1;
        assert!(cfg.validate().is_err());
    }
}
