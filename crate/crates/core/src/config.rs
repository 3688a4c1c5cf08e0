//! System configuration and its invariants.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Which acquisition function ranks candidate actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    #[default]
    Ucb,
    Ei,
    Pi,
}

/// Rectangular device trajectory centred on the edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub rect_width_m: f64,
    pub rect_height_m: f64,
    pub step_m: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            rect_width_m: 100.0,
            rect_height_m: 50.0,
            step_m: 2.5,
        }
    }
}

/// Parameters of the synthetic content/detection oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// Confidence ceiling per device.
    pub alpha_max: f64,
    /// Attenuation slope γ_g in g(a) = 1/(1 + γ_g (4^a - 1)).
    pub attenuation: f64,
    /// AR(1) coefficient of the content-complexity process.
    pub content_ar: f64,
    /// Long-run mean of the content-complexity process.
    pub content_mean: f64,
    /// Innovation standard deviation of the content-complexity process.
    pub content_innovation: f64,
    /// Confidence noise σ as a fraction of `alpha_max`.
    pub noise_frac: f64,
    /// Standard deviation of the extra accuracy noise.
    pub accuracy_noise: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            alpha_max: 2.0,
            attenuation: 0.05,
            content_ar: 0.95,
            content_mean: 0.6,
            content_innovation: 0.1,
            noise_frac: 0.05,
            accuracy_noise: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorParams {
    /// History length l of the input state.
    pub history_len: usize,
    /// Replay memory capacity J_D.
    pub memory_size: usize,
    /// Minibatch size J_D^s.
    pub batch_size: usize,
    /// Initial candidate count and cap K_1.
    pub k_initial: usize,
    /// Candidate-count update interval Δ_K.
    pub k_interval: usize,
    /// Training interval Δ_D.
    pub train_interval: usize,
    /// Adam learning rate ξ.
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub grad_clip: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticParams {
    /// Observation cache capacity J_B.
    pub cache_size: usize,
    /// Hyperparameter refit interval Δ_B.
    pub refit_interval: usize,
    /// Exploration coefficient ζ.
    pub zeta: f64,
    pub acquisition: AcquisitionKind,
    /// Iteration budget of a single refit.
    pub refit_max_iters: usize,
}

impl Default for CriticParams {
    fn default() -> Self {
        Self {
            cache_size: 256,
            refit_interval: 20,
            zeta: 2.0,
            acquisition: AcquisitionKind::Ucb,
            refit_max_iters: 30,
        }
    }
}

/// Full simulation + controller configuration.
///
/// Per-device quantities are stored as vectors of length `n_devices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_devices: usize,
    pub n_levels: usize,
    pub bandwidth_hz: f64,
    pub tx_power_w: Vec<f64>,
    pub noise_psd_w_per_hz: f64,
    pub latency_weight: Vec<f64>,
    /// Native (width, height) in pixels per device.
    pub native_resolution: Vec<(u32, u32)>,
    pub iou_threshold: f64,
    pub horizon: usize,
    pub antenna_gain: f64,
    pub carrier_hz: f64,
    pub pathloss_exponent: f64,
    /// Per-device degradation throughput ψ^d_n (pixels/s).
    pub device_efficiency: Vec<f64>,
    /// Edge-server detector throughput ψ (pixels/s).
    pub server_efficiency: f64,
    /// Fixed per-inference overhead κ₀ at the edge server (s).
    pub server_overhead_s: f64,
    pub mobility: MobilityParams,
    pub oracle: OracleParams,
    pub actor: ActorParams,
    pub critic: CriticParams,
    /// Largest action space the exhaustive policies are allowed to enumerate.
    pub enumeration_cap: usize,
}

/// Converts a power spectral density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Default initial candidate count min{8N, A^N}.
pub fn default_k_initial(n_devices: usize, n_levels: usize) -> usize {
    let cap = 8 * n_devices;
    action_space_size(n_devices, n_levels).map_or(cap, |s| s.min(cap))
}

/// A^N, or `None` on overflow.
pub fn action_space_size(n_devices: usize, n_levels: usize) -> Option<usize> {
    let mut s: usize = 1;
    for _ in 0..n_devices {
        s = s.checked_mul(n_levels)?;
    }
    Some(s)
}

impl SystemConfig {
    /// Homogeneous defaults for `n` devices and `a` levels.
    pub fn homogeneous(n: usize, a: usize) -> Self {
        Self {
            n_devices: n,
            n_levels: a,
            bandwidth_hz: 5e6,
            tx_power_w: vec![0.1; n],
            noise_psd_w_per_hz: dbm_per_hz_to_watt(-174.0),
            latency_weight: vec![1.0; n],
            native_resolution: vec![(1920, 1200); n],
            iou_threshold: 0.5,
            horizon: 3000,
            antenna_gain: 4.11,
            carrier_hz: 2.4e9,
            pathloss_exponent: 2.4,
            device_efficiency: vec![1e8; n],
            server_efficiency: 2e8,
            server_overhead_s: 0.01,
            mobility: MobilityParams::default(),
            oracle: OracleParams::default(),
            actor: ActorParams {
                history_len: 1,
                memory_size: 512,
                batch_size: 128,
                k_initial: default_k_initial(n, a),
                k_interval: 32,
                train_interval: 20,
                learning_rate: 0.01,
                hidden: vec![128, 128],
                grad_clip: 5.0,
            },
            critic: CriticParams::default(),
            enumeration_cap: 100_000,
        }
    }

    /// Sets every device's latency weight to `w`.
    pub fn with_weight(mut self, w: f64) -> Self {
        self.latency_weight = vec![w; self.n_devices];
        self
    }

    /// Pixel count ι^w·ι^h of device `n`.
    pub fn pixels(&self, n: usize) -> f64 {
        let (w, h) = self.native_resolution[n];
        w as f64 * h as f64
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_devices;
        if n == 0 {
            return Err(LabError::config("n_devices", "must be >= 1 (N >= 1)"));
        }
        if self.n_levels == 0 {
            return Err(LabError::config("n_levels", "must be >= 1 (A >= 1)"));
        }
        if self.n_levels > 16 {
            return Err(LabError::config("n_levels", "must be <= 16"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(LabError::config("bandwidth_hz", "must be > 0 (W > 0)"));
        }
        if !(self.noise_psd_w_per_hz > 0.0) {
            return Err(LabError::config("noise_psd", "must be > 0"));
        }
        let per_device: [(&str, usize); 5] = [
            ("tx_power_w", self.tx_power_w.len()),
            ("latency_weight", self.latency_weight.len()),
            ("native_resolution", self.native_resolution.len()),
            ("device_efficiency", self.device_efficiency.len()),
            ("n_devices", n),
        ];
        for (key, len) in per_device {
            if len != n {
                return Err(LabError::config(key, format!("expected {n} entries, got {len}")));
            }
        }
        if self.tx_power_w.iter().any(|&p| !(p > 0.0)) {
            return Err(LabError::config("tx_power_w", "must be > 0"));
        }
        if self.latency_weight.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(LabError::config("latency_weight", "must be >= 0 (w_n >= 0)"));
        }
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(LabError::config("iou_threshold", "must lie in (0, 1]"));
        }
        let div = 1u32 << (self.n_levels - 1);
        for (i, &(w, h)) in self.native_resolution.iter().enumerate() {
            if w == 0 || h == 0 || w % div != 0 || h % div != 0 {
                return Err(LabError::config(
                    format!("native_resolution[{i}]"),
                    format!("({w}, {h}) is not divisible by 2^(A-1) = {div}"),
                ));
            }
        }
        if self.device_efficiency.iter().any(|&p| !(p > 0.0)) {
            return Err(LabError::config("device_efficiency", "must be > 0"));
        }
        if !(self.server_efficiency > 0.0) {
            return Err(LabError::config("server_efficiency", "must be > 0"));
        }
        if !(self.server_overhead_s >= 0.0) {
            return Err(LabError::config("server_overhead_s", "must be >= 0"));
        }
        if !(self.antenna_gain > 0.0 && self.carrier_hz > 0.0 && self.pathloss_exponent > 0.0) {
            return Err(LabError::config("channel", "antenna gain, carrier and exponent must be > 0"));
        }
        if self.horizon == 0 {
            return Err(LabError::config("horizon", "must be >= 1"));
        }
        let o = &self.oracle;
        if !(o.alpha_max > 0.0) || !(o.attenuation >= 0.0) {
            return Err(LabError::config("oracle", "alpha_max > 0 and attenuation >= 0 required"));
        }
        if !(0.0..1.0).contains(&o.content_ar) || !(o.content_mean > 0.0 && o.content_mean <= 1.0) {
            return Err(LabError::config("oracle.content", "ar in [0,1), mean in (0,1]"));
        }
        if !(o.noise_frac >= 0.0 && o.accuracy_noise >= 0.0 && o.content_innovation >= 0.0) {
            return Err(LabError::config("oracle", "noise scales must be >= 0"));
        }
        let m = &self.mobility;
        if !(m.rect_width_m > 0.0 && m.rect_height_m > 0.0 && m.step_m >= 0.0) {
            return Err(LabError::config("mobility", "rectangle must be non-degenerate"));
        }
        let a = &self.actor;
        if a.history_len == 0 {
            return Err(LabError::config("actor.history_len", "must be >= 1"));
        }
        if a.memory_size == 0 || a.batch_size == 0 {
            return Err(LabError::config("actor.memory_size", "memory and batch must be >= 1"));
        }
        if a.k_initial == 0 {
            return Err(LabError::config("actor.k_initial", "must be >= 1"));
        }
        if a.k_interval == 0 || a.train_interval == 0 {
            return Err(LabError::config("actor.k_interval", "intervals must be >= 1"));
        }
        if !(a.learning_rate > 0.0) {
            return Err(LabError::config("actor.learning_rate", "must be > 0"));
        }
        let c = &self.critic;
        if c.cache_size == 0 || c.refit_interval == 0 {
            return Err(LabError::config("critic.cache_size", "cache and interval must be >= 1"));
        }
        if !(c.zeta >= 0.0) {
            return Err(LabError::config("critic.zeta", "must be >= 0"));
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::homogeneous(3, 4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SystemConfig::default();
        c.validate().unwrap();
        assert_eq!(c.actor.k_initial, 24);
        assert_eq!(default_k_initial(1, 4), 4);
        assert_eq!(default_k_initial(7, 4), 56);
    }

    #[test]
    fn dbm_conversion() {
        let w = dbm_per_hz_to_watt(-174.0);
        let expected = 10f64.powf(-17.4) * 1e-3;
        assert!((w - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn rejects_zero_devices() {
        let mut c = SystemConfig::homogeneous(1, 4);
        c.n_devices = 0;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("N >= 1"), "{err}");
    }

    #[test]
    fn rejects_indivisible_resolution() {
        let mut c = SystemConfig::homogeneous(2, 4);
        c.native_resolution[1] = (1924, 1200);
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("native_resolution[1]"), "{err}");
    }
}
