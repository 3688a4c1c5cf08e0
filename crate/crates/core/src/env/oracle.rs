//! Synthetic, content-dependent stand-in for an object detector.
//!
//! Each device sees a content-complexity process C_n(t) ∈ (0, 1]. A frame sent at
//! level `a` yields confidence α = α_max·C·g(a) + noise with
//! g(a) = 1 / (1 + γ_g (4^a − 1)), and an accuracy c that tracks α/α_max.
//! Every `(device, slot, level)` triple maps to a fixed outcome, so exhaustive
//! policies can probe all levels without perturbing the slot.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::OracleParams;
use crate::rng::{SeedTree, LABEL_ENV, LABEL_ORACLE};

const CONTENT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ContentOracle {
    params: OracleParams,
    seeds: SeedTree,
    /// content[n][t - 1] for slots generated so far.
    content: Vec<Vec<f64>>,
    content_rngs: Vec<crate::rng::LabRng>,
}

/// Level attenuation g(a).
pub fn attenuation(level: usize, slope: f64) -> f64 {
    1.0 / (1.0 + slope * (4f64.powi(level as i32) - 1.0))
}

fn reflect_unit(mut x: f64) -> f64 {
    // reflect into [floor, 1]
    for _ in 0..8 {
        if x > 1.0 {
            x = 2.0 - x;
        } else if x < CONTENT_FLOOR {
            x = 2.0 * CONTENT_FLOOR - x;
        } else {
            return x;
        }
    }
    x.clamp(CONTENT_FLOOR, 1.0)
}

impl ContentOracle {
    pub fn new(params: OracleParams, n_devices: usize, seeds: SeedTree) -> Self {
        let content_rngs = (0..n_devices)
            .map(|n| seeds.stream_at(LABEL_ENV, &[1, n as u64]))
            .collect();
        Self {
            params,
            seeds,
            content: vec![Vec::new(); n_devices],
            content_rngs,
        }
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    /// Content complexity C_n(t), t ≥ 1. Extends the process as needed.
    pub fn complexity(&mut self, device: usize, t: usize) -> f64 {
        assert!(t >= 1, "slots are numbered from 1");
        let p = &self.params;
        let series = &mut self.content[device];
        let rng = &mut self.content_rngs[device];
        while series.len() < t {
            let next = match series.last() {
                None => {
                    // stationary-ish start around the mean
                    let z: f64 = rng.sample(StandardNormal);
                    let sd = p.content_innovation / (1.0 - p.content_ar * p.content_ar).sqrt();
                    reflect_unit(p.content_mean + sd * z)
                }
                Some(&prev) => {
                    let z: f64 = rng.sample(StandardNormal);
                    reflect_unit(
                        p.content_mean + p.content_ar * (prev - p.content_mean) + p.content_innovation * z,
                    )
                }
            };
            series.push(next);
        }
        series[t - 1]
    }

    /// Noise-free expected-confidence core α_max·C·g(a).
    pub fn mean_confidence(&mut self, device: usize, t: usize, level: usize) -> f64 {
        self.params.alpha_max * self.complexity(device, t) * attenuation(level, self.params.attenuation)
    }

    /// Confidence α and accuracy c for one device, slot and level.
    pub fn query(&mut self, device: usize, t: usize, level: usize) -> (f64, f64) {
        let core = self.mean_confidence(device, t, level);
        let p = &self.params;
        let mut rng = self
            .seeds
            .stream_at(LABEL_ORACLE, &[device as u64, t as u64, level as u64]);
        let z_alpha: f64 = rng.sample(StandardNormal);
        let z_acc: f64 = rng.sample(StandardNormal);
        let alpha = (core + p.noise_frac * p.alpha_max * z_alpha).clamp(0.0, p.alpha_max);
        let acc = (alpha / p.alpha_max + p.accuracy_noise * z_acc).clamp(0.0, 1.0);
        (alpha, acc)
    }
}
