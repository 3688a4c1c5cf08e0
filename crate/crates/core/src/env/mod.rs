//! Discrete-time offloading environment.
//!
//! Per slot: devices move, channels fade, each device degrades its frame,
//! uploads it over its bandwidth share, and the edge server runs detection.

pub mod channel;
pub mod detection;
pub mod latency;
pub mod mobility;
pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{LabError, Result};
use crate::rng::{SeedTree, LABEL_CHANNEL, LABEL_ENV};
use crate::types::DegradationAction;

pub use channel::{mean_gain, sample_channel, ChannelRealization};
pub use detection::{detection_accuracy, BoundingBox, ScoredBox};
pub use latency::{data_size_bits, degradation_latency, edge_compute_latency, transmission_time, uplink_rate};
pub use mobility::MobilityModel;
pub use oracle::ContentOracle;

/// Complete outcome of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub t: usize,
    pub action: Vec<usize>,
    pub bandwidth: Vec<f64>,
    pub confidence: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub tau_o: Vec<f64>,
    pub tau_c: Vec<f64>,
    pub utility: Vec<f64>,
    pub total_utility: f64,
}

impl SlotRecord {
    /// End-to-end latency of device `n`.
    pub fn latency(&self, n: usize) -> f64 {
        self.tau_d[n] + self.tau_o[n] + self.tau_c[n]
    }

    pub fn latencies(&self) -> Vec<f64> {
        (0..self.action.len()).map(|n| self.latency(n)).collect()
    }
}

/// Simulation environment for one run. Everything random is keyed by the
/// master seed and the slot index, so two environments built from the same
/// seed present identical slots whatever actions are taken.
#[derive(Debug, Clone)]
pub struct Environment {
    cfg: SystemConfig,
    seeds: SeedTree,
    mobility: MobilityModel,
    gains: Vec<Vec<f64>>,
    oracle: ContentOracle,
}

impl Environment {
    pub fn new(cfg: SystemConfig, seeds: SeedTree) -> Result<Self> {
        cfg.validate()?;
        let mut rng = seeds.stream_at(LABEL_ENV, &[0]);
        let mobility = MobilityModel::random_on_bottom_edge(&cfg.mobility, cfg.n_devices, &mut rng);
        let oracle = ContentOracle::new(cfg.oracle.clone(), cfg.n_devices, seeds);
        Ok(Self {
            cfg,
            seeds,
            mobility,
            gains: Vec::new(),
            oracle,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn oracle_mut(&mut self) -> &mut ContentOracle {
        &mut self.oracle
    }

    /// Channel gains of slot `t` (t ≥ 1). Identical on every call.
    pub fn channel(&mut self, t: usize) -> Result<&[f64]> {
        if t == 0 {
            return Err(LabError::domain("slots are numbered from 1"));
        }
        while self.gains.len() < t {
            let distances = if self.gains.is_empty() {
                self.mobility.distances()
            } else {
                self.mobility.advance()
            };
            let slot = self.gains.len() as u64 + 1;
            let mut rng = self.seeds.stream_at(LABEL_CHANNEL, &[slot]);
            let realization = sample_channel(&distances, &self.cfg, &mut rng)?;
            self.gains.push(realization.gains);
        }
        Ok(&self.gains[t - 1])
    }

    /// Upload payloads in bits for `action`.
    pub fn data_sizes(&self, action: &DegradationAction) -> Result<Vec<f64>> {
        action
            .levels()
            .iter()
            .zip(&self.cfg.native_resolution)
            .map(|(&a, &res)| data_size_bits(res, a))
            .collect()
    }

    /// Runs `action` with bandwidth fractions `bandwidth` in slot `t`.
    pub fn execute_slot(&mut self, action: &DegradationAction, bandwidth: &[f64], t: usize) -> Result<SlotRecord> {
        let n_dev = self.cfg.n_devices;
        if action.len() != n_dev {
            return Err(LabError::Shape { expected: n_dev, got: action.len() });
        }
        if bandwidth.len() != n_dev {
            return Err(LabError::Shape { expected: n_dev, got: bandwidth.len() });
        }
        if let Some(&a) = action.levels().iter().find(|&&a| a >= self.cfg.n_levels) {
            return Err(LabError::domain(format!("level {a} outside 0..{}", self.cfg.n_levels)));
        }
        if bandwidth.iter().any(|&b| !(b >= 0.0)) || bandwidth.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(LabError::domain(format!("infeasible bandwidth split {bandwidth:?}")));
        }
        let gains = self.channel(t)?.to_vec();
        let sizes = self.data_sizes(action)?;
        let cfg = &self.cfg;
        let mut rec = SlotRecord {
            t,
            action: action.levels().to_vec(),
            bandwidth: bandwidth.to_vec(),
            confidence: Vec::with_capacity(n_dev),
            accuracy: Vec::with_capacity(n_dev),
            tau_d: Vec::with_capacity(n_dev),
            tau_o: Vec::with_capacity(n_dev),
            tau_c: Vec::with_capacity(n_dev),
            utility: Vec::with_capacity(n_dev),
            total_utility: 0.0,
        };
        for n in 0..n_dev {
            let a = action.levels()[n];
            let pixels = cfg.pixels(n);
            let td = degradation_latency(pixels, a, cfg.device_efficiency[n])?;
            let to = transmission_time(
                sizes[n],
                bandwidth[n].min(1.0),
                gains[n],
                cfg.bandwidth_hz,
                cfg.tx_power_w[n],
                cfg.noise_psd_w_per_hz,
            )?;
            let tc = edge_compute_latency(pixels, a, cfg.server_efficiency, cfg.server_overhead_s)?;
            let (alpha, acc) = self.oracle.query(n, t, a);
            let u = alpha - cfg.latency_weight[n] * (td + to + tc);
            rec.confidence.push(alpha);
            rec.accuracy.push(acc);
            rec.tau_d.push(td);
            rec.tau_o.push(to);
            rec.tau_c.push(tc);
            rec.utility.push(u);
        }
        rec.total_utility = rec.utility.iter().sum();
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(cfg: SystemConfig) -> Environment {
        Environment::new(cfg, SeedTree::new(13)).unwrap()
    }

    #[test]
    fn block_fading_is_stable_within_slot() {
        let mut e = env(SystemConfig::default());
        let first = e.channel(5).unwrap().to_vec();
        let _ = e.channel(9).unwrap();
        assert_eq!(e.channel(5).unwrap(), &first[..]);
        assert!(first.iter().all(|&h| h > 0.0));
    }

    #[test]
    fn utility_identity_holds() {
        let mut e = env(SystemConfig::default());
        let a = DegradationAction::new(vec![0, 1, 3], 4).unwrap();
        let rec = e.execute_slot(&a, &[0.5, 0.3, 0.2], 3).unwrap();
        let mut total = 0.0;
        for n in 0..3 {
            let u = rec.confidence[n] - 1.0 * (rec.tau_d[n] + rec.tau_o[n] + rec.tau_c[n]);
            assert_eq!(u, rec.utility[n]);
            total += u;
        }
        assert!((total - rec.total_utility).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_ignores_latency() {
        let mut e = env(SystemConfig::default().with_weight(0.0));
        let a = DegradationAction::uniform(3, 1);
        let rec = e.execute_slot(&a, &[0.2, 0.2, 0.2], 1).unwrap();
        assert_eq!(rec.utility, rec.confidence);
    }

    #[test]
    fn zero_bandwidth_gives_infinite_latency() {
        let mut e = env(SystemConfig::default());
        let rec = e
            .execute_slot(&DegradationAction::uniform(3, 0), &[0.0, 0.5, 0.5], 2)
            .unwrap();
        assert_eq!(rec.tau_o[0], f64::INFINITY);
        assert!(rec.tau_o[1].is_finite());
    }

    #[test]
    fn rejects_infeasible_split() {
        let mut e = env(SystemConfig::default());
        let a = DegradationAction::uniform(3, 0);
        assert!(e.execute_slot(&a, &[0.5, 0.5, 0.5], 1).is_err());
        assert!(e.execute_slot(&a, &[0.5, -0.1, 0.5], 1).is_err());
        assert!(e.execute_slot(&a, &[0.5, 0.5], 1).is_err());
    }

    #[test]
    fn same_seed_same_slots() {
        let mut a = env(SystemConfig::default());
        let mut b = env(SystemConfig::default());
        let act = DegradationAction::uniform(3, 2);
        let _ = b.execute_slot(&DegradationAction::uniform(3, 0), &[0.3, 0.3, 0.3], 4);
        for t in 1..10 {
            let ra = a.execute_slot(&act, &[0.3, 0.3, 0.4], t).unwrap();
            let rb = b.execute_slot(&act, &[0.3, 0.3, 0.4], t).unwrap();
            assert_eq!(ra, rb);
        }
    }
}
