//! Transmission-success models.
//!
//! Two analytic models give the per-packet success probability as a function
//! of the number of simultaneous transmitters on a channel:
//!
//! - bandwidth-limited: `1 - eps` while the packet count is within capacity,
//!   degrading as `C/n - eps` beyond it (clamped to a valid probability);
//! - slotted-window random access: `exp(-2n/A)` where `A` is the ratio of
//!   the transmission window to the packet airtime.
//!
//! A packet-level simulator models a LoRa-style uplink: log-distance path
//! loss with shadowing, a sensitivity floor, and the capture effect among
//! time-overlapping packets on the same channel.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::core::{Error, Result, SensorSite, TransmissionRound, Vec2};

/// Per-packet success probability on a bandwidth-limited channel carrying
/// `n` packets: `1 - epsilon` for `n <= capacity`, else
/// `capacity/n - epsilon`, clamped to `[0, 1]`.
pub fn p_success_bw(n: u32, capacity: u32, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "success probability undefined for zero transmitters".into(),
        ));
    }
    if capacity == 0 {
        return Err(Error::InvalidArgument("capacity must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument("epsilon must be in [0, 1)".into()));
    }
    let p = if n <= capacity {
        1.0 - epsilon
    } else {
        capacity as f64 / n as f64 - epsilon
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Per-packet success probability on a slotted-window random-access channel
/// with `n` transmitters: `exp(-2n/A)`.
pub fn p_success_aloha(n: u32, window_ratio: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "success probability undefined for zero transmitters".into(),
        ));
    }
    if !(window_ratio > 0.0) {
        return Err(Error::InvalidArgument("window ratio A must be > 0".into()));
    }
    Ok((-2.0 * n as f64 / window_ratio).exp())
}

/// Kind of analytic channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticKind {
    BandwidthLimited {
        /// Packets per step one channel can carry at full reliability.
        capacity: u32,
        /// Background failure rate.
        epsilon: f64,
    },
    Aloha {
        /// Window-to-airtime ratio A = W / tau.
        window_ratio: f64,
    },
}

impl AnalyticKind {
    /// Per-packet success probability with `n` transmitters on one channel
    /// of this kind; 1 for `n = 0` (no contention).
    pub fn success(&self, n: u32) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match *self {
            AnalyticKind::BandwidthLimited { capacity, epsilon } => {
                p_success_bw(n, capacity, epsilon).unwrap_or(0.0)
            }
            AnalyticKind::Aloha { window_ratio } => {
                p_success_aloha(n, window_ratio).unwrap_or(0.0)
            }
        }
    }
}

/// An analytic channel bank: `num_channels` independent channels of the
/// same kind; transmitters pick a channel uniformly at random.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticChannel {
    #[serde(flatten)]
    pub kind: AnalyticKind,
    pub num_channels: u32,
}

impl AnalyticChannel {
    pub fn validate(&self) -> Result<()> {
        if self.num_channels == 0 {
            return Err(Error::InvalidArgument("num_channels must be >= 1".into()));
        }
        match self.kind {
            AnalyticKind::BandwidthLimited { capacity, epsilon } => {
                p_success_bw(1, capacity, epsilon).map(|_| ())
            }
            AnalyticKind::Aloha { window_ratio } => p_success_aloha(1, window_ratio).map(|_| ()),
        }
    }

    /// Success probability for one of `n` packets sharing a single channel.
    pub fn per_channel_success(&self, n: u32) -> f64 {
        match self.kind {
            AnalyticKind::BandwidthLimited { capacity, epsilon } => {
                p_success_bw(n, capacity, epsilon).unwrap_or(0.0)
            }
            AnalyticKind::Aloha { window_ratio } => {
                p_success_aloha(n, window_ratio).unwrap_or(0.0)
            }
        }
    }
}

/// Resolve one round on an analytic channel bank: each transmitter is
/// assigned a channel uniformly at random, then succeeds independently with
/// the per-channel probability for that channel's load. Draws happen in
/// ascending sensor-id order, so outcomes are reproducible for a given rng.
pub fn resolve_round_analytic(
    attempted: &BTreeSet<usize>,
    channel: &AnalyticChannel,
    rng: &mut impl Rng,
) -> Result<TransmissionRound> {
    channel.validate()?;
    if attempted.is_empty() {
        return Ok(TransmissionRound::empty());
    }
    let m = channel.num_channels as usize;
    let ids: Vec<usize> = attempted.iter().cloned().collect();
    let assignment: Vec<usize> = ids.iter().map(|_| rng.random_range(0..m)).collect();
    let mut load = vec![0u32; m];
    for &ch in &assignment {
        load[ch] += 1;
    }
    let mut succeeded = BTreeSet::new();
    for (idx, &id) in ids.iter().enumerate() {
        let p = channel.per_channel_success(load[assignment[idx]]);
        if rng.random::<f64>() < p {
            succeeded.insert(id);
        }
    }
    TransmissionRound::new(attempted.clone(), succeeded)
}

/// Packet-level LoRa-style uplink model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraChannel {
    pub gateway_position: Vec2,
    pub num_channels: u32,
    /// Path loss exponent gamma.
    pub path_loss_exponent: f64,
    /// Reference loss at 1 m, dB.
    pub reference_loss_db: f64,
    /// Transmit power, dBm.
    pub tx_power_dbm: f64,
    /// Receiver sensitivity, dBm.
    pub sensitivity_dbm: f64,
    /// Power margin a packet needs over the strongest overlapping
    /// interferer to be captured, dB.
    pub capture_margin_db: f64,
    /// Std-dev of log-normal shadowing, dB.
    pub noise_std_db: f64,
    /// Packet airtime tau, seconds.
    pub packet_airtime: f64,
    /// Transmission window W, seconds; starts are uniform in [0, W - tau].
    pub window: f64,
}

impl LoraChannel {
    /// Textbook defaults: gamma 2.7, 40 dB reference loss, 14 dBm transmit
    /// power, -123 dBm sensitivity, 6 dB capture margin, 2 dB shadowing.
    pub fn with_gateway(gateway_position: Vec2) -> Self {
        LoraChannel {
            gateway_position,
            num_channels: 4,
            path_loss_exponent: 2.7,
            reference_loss_db: 40.0,
            tx_power_dbm: 14.0,
            sensitivity_dbm: -123.0,
            capture_margin_db: 6.0,
            noise_std_db: 2.0,
            packet_airtime: 0.37,
            window: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_channels == 0 {
            return Err(Error::InvalidArgument("num_channels must be >= 1".into()));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::InvalidArgument("path loss exponent must be > 0".into()));
        }
        if !(self.capture_margin_db >= 0.0) {
            return Err(Error::InvalidArgument("capture margin must be >= 0".into()));
        }
        if !(self.noise_std_db >= 0.0) {
            return Err(Error::InvalidArgument("noise std must be >= 0".into()));
        }
        if !(self.packet_airtime > 0.0) || !(self.window >= self.packet_airtime) {
            return Err(Error::InvalidArgument(
                "need 0 < packet_airtime <= window".into(),
            ));
        }
        Ok(())
    }

    /// Mean received power at the gateway from `position`, dBm. Distances
    /// under 1 m are clamped to 1 m.
    pub fn mean_received_power(&self, position: &Vec2) -> f64 {
        let d = self.gateway_position.distance(position).max(1.0);
        self.tx_power_dbm - (self.reference_loss_db + 10.0 * self.path_loss_exponent * d.log10())
    }
}

struct Packet {
    id: usize,
    channel: usize,
    start: f64,
    power_dbm: f64,
}

/// Resolve one round on the LoRa model: every transmitter picks a channel
/// and a start time uniformly at random; received power is the log-distance
/// mean plus Gaussian shadowing. A packet below sensitivity is lost; among
/// time-overlapping packets on the same channel a packet survives only if
/// its power exceeds the strongest overlapping interferer by the capture
/// margin.
pub fn resolve_round_lora(
    attempted: &BTreeSet<usize>,
    sites: &[SensorSite],
    channel: &LoraChannel,
    rng: &mut impl Rng,
) -> Result<TransmissionRound> {
    channel.validate()?;
    if attempted.is_empty() {
        return Ok(TransmissionRound::empty());
    }
    if let Some(&id) = attempted.iter().find(|&&id| id >= sites.len()) {
        return Err(Error::UnknownSensor {
            id,
            count: sites.len(),
        });
    }
    let shadowing = Normal::new(0.0, channel.noise_std_db)
        .map_err(|e| Error::InvalidArgument(format!("shadowing: {e}")))?;
    let span = channel.window - channel.packet_airtime;
    let mut packets = Vec::with_capacity(attempted.len());
    for &id in attempted {
        let ch = rng.random_range(0..channel.num_channels as usize);
        let start = if span > 0.0 {
            rng.random_range(0.0..span)
        } else {
            0.0
        };
        let power_dbm = channel.mean_received_power(&sites[id].position) + shadowing.sample(rng);
        packets.push(Packet {
            id,
            channel: ch,
            start,
            power_dbm,
        });
    }
    let mut succeeded = BTreeSet::new();
    for p in &packets {
        if p.power_dbm < channel.sensitivity_dbm {
            continue;
        }
        let strongest_interferer = packets
            .iter()
            .filter(|q| {
                q.id != p.id
                    && q.channel == p.channel
                    && (q.start - p.start).abs() < channel.packet_airtime
            })
            .map(|q| q.power_dbm)
            .fold(f64::NEG_INFINITY, f64::max);
        if strongest_interferer == f64::NEG_INFINITY
            || p.power_dbm - strongest_interferer >= channel.capture_margin_db
        {
            succeeded.insert(p.id);
        }
    }
    TransmissionRound::new(attempted.clone(), succeeded)
}
