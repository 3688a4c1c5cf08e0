//! TOML experiment configuration.
//!
//! Every key is optional; missing keys take the defaults of
//! [`SystemConfig::homogeneous`]. Per-device keys accept either one value for
//! all devices or an array with one entry per device. Layout:
//!
//! ```toml
//! [system]
//! n_devices = 3
//! n_levels = 4
//! bandwidth_hz = 5e6
//! tx_power_w = 0.1                 # or [0.1, 0.2, 0.1]
//! noise_psd_dbm_per_hz = -174.0
//! latency_weight = 1.0
//! native_resolution = [1920, 1200] # or [[1920, 1200], [1280, 720], ...]
//! iou_threshold = 0.5
//! horizon = 3000
//! antenna_gain = 4.11
//! carrier_hz = 2.4e9
//! pathloss_exponent = 2.4
//! device_efficiency = 1e8
//! server_efficiency = 2e8
//! server_overhead_s = 0.01
//! enumeration_cap = 100000
//!
//! [mobility]   # rect_width_m, rect_height_m, step_m
//! [oracle]     # alpha_max, attenuation, content_ar, content_mean, content_innovation, noise_frac, accuracy_noise
//! [actor]      # history_len, memory_size, batch_size, k_initial, k_interval, train_interval, learning_rate, hidden, grad_clip
//! [critic]     # cache_size, refit_interval, zeta, acquisition ("ucb" | "ei" | "pi"), refit_max_iters
//! ```

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use lab_core::config::{dbm_per_hz_to_watt, default_k_initial};
use lab_core::{AcquisitionKind, SystemConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PerDevice<T> {
    One(T),
    Each(Vec<T>),
}

impl<T: Clone> PerDevice<T> {
    fn expand(self, n: usize, key: &str) -> Result<Vec<T>> {
        match self {
            PerDevice::One(v) => Ok(vec![v; n]),
            PerDevice::Each(v) if v.len() == n => Ok(v),
            PerDevice::Each(v) => Err(anyhow!("{key}: expected 1 or {n} entries, got {}", v.len())),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    n_devices: Option<usize>,
    n_levels: Option<usize>,
    bandwidth_hz: Option<f64>,
    tx_power_w: Option<PerDevice<f64>>,
    noise_psd_dbm_per_hz: Option<f64>,
    noise_psd_w_per_hz: Option<f64>,
    latency_weight: Option<PerDevice<f64>>,
    native_resolution: Option<PerDevice<(u32, u32)>>,
    iou_threshold: Option<f64>,
    horizon: Option<usize>,
    antenna_gain: Option<f64>,
    carrier_hz: Option<f64>,
    pathloss_exponent: Option<f64>,
    device_efficiency: Option<PerDevice<f64>>,
    server_efficiency: Option<f64>,
    server_overhead_s: Option<f64>,
    enumeration_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MobilitySection {
    rect_width_m: Option<f64>,
    rect_height_m: Option<f64>,
    step_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSection {
    alpha_max: Option<f64>,
    attenuation: Option<f64>,
    content_ar: Option<f64>,
    content_mean: Option<f64>,
    content_innovation: Option<f64>,
    noise_frac: Option<f64>,
    accuracy_noise: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActorSection {
    history_len: Option<usize>,
    memory_size: Option<usize>,
    batch_size: Option<usize>,
    k_initial: Option<usize>,
    k_interval: Option<usize>,
    train_interval: Option<usize>,
    learning_rate: Option<f64>,
    hidden: Option<Vec<usize>>,
    grad_clip: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CriticSection {
    cache_size: Option<usize>,
    refit_interval: Option<usize>,
    zeta: Option<f64>,
    acquisition: Option<AcquisitionKind>,
    refit_max_iters: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    mobility: MobilitySection,
    #[serde(default)]
    oracle: OracleSection,
    #[serde(default)]
    actor: ActorSection,
    #[serde(default)]
    critic: CriticSection,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

/// Parses TOML text into a validated configuration.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| anyhow!("invalid configuration: {e}"))?;
    let s = file.system;
    let n = s.n_devices.unwrap_or(3);
    let a = s.n_levels.unwrap_or(4);
    if n == 0 {
        return Err(anyhow!("system.n_devices: must be >= 1 (N >= 1)"));
    }
    let mut cfg = SystemConfig::homogeneous(n, a);
    set!(cfg.bandwidth_hz, s.bandwidth_hz);
    if let Some(v) = s.tx_power_w {
        cfg.tx_power_w = v.expand(n, "system.tx_power_w")?;
    }
    match (s.noise_psd_dbm_per_hz, s.noise_psd_w_per_hz) {
        (Some(_), Some(_)) => {
            return Err(anyhow!("system.noise_psd_*: give either noise_psd_dbm_per_hz or noise_psd_w_per_hz, not both"))
        }
        (Some(dbm), None) => cfg.noise_psd_w_per_hz = dbm_per_hz_to_watt(dbm),
        (None, Some(w)) => cfg.noise_psd_w_per_hz = w,
        (None, None) => {}
    }
    if let Some(v) = s.latency_weight {
        cfg.latency_weight = v.expand(n, "system.latency_weight")?;
    }
    if let Some(v) = s.native_resolution {
        cfg.native_resolution = v.expand(n, "system.native_resolution")?;
    }
    set!(cfg.iou_threshold, s.iou_threshold);
    set!(cfg.horizon, s.horizon);
    set!(cfg.antenna_gain, s.antenna_gain);
    set!(cfg.carrier_hz, s.carrier_hz);
    set!(cfg.pathloss_exponent, s.pathloss_exponent);
    if let Some(v) = s.device_efficiency {
        cfg.device_efficiency = v.expand(n, "system.device_efficiency")?;
    }
    set!(cfg.server_efficiency, s.server_efficiency);
    set!(cfg.server_overhead_s, s.server_overhead_s);
    set!(cfg.enumeration_cap, s.enumeration_cap);

    let m = file.mobility;
    set!(cfg.mobility.rect_width_m, m.rect_width_m);
    set!(cfg.mobility.rect_height_m, m.rect_height_m);
    set!(cfg.mobility.step_m, m.step_m);

    let o = file.oracle;
    set!(cfg.oracle.alpha_max, o.alpha_max);
    set!(cfg.oracle.attenuation, o.attenuation);
    set!(cfg.oracle.content_ar, o.content_ar);
    set!(cfg.oracle.content_mean, o.content_mean);
    set!(cfg.oracle.content_innovation, o.content_innovation);
    set!(cfg.oracle.noise_frac, o.noise_frac);
    set!(cfg.oracle.accuracy_noise, o.accuracy_noise);

    let ac = file.actor;
    set!(cfg.actor.history_len, ac.history_len);
    set!(cfg.actor.memory_size, ac.memory_size);
    set!(cfg.actor.batch_size, ac.batch_size);
    cfg.actor.k_initial = ac.k_initial.unwrap_or_else(|| default_k_initial(n, a));
    set!(cfg.actor.k_interval, ac.k_interval);
    set!(cfg.actor.train_interval, ac.train_interval);
    set!(cfg.actor.learning_rate, ac.learning_rate);
    set!(cfg.actor.hidden, ac.hidden);
    set!(cfg.actor.grad_clip, ac.grad_clip);

    let c = file.critic;
    set!(cfg.critic.cache_size, c.cache_size);
    set!(cfg.critic.refit_interval, c.refit_interval);
    set!(cfg.critic.zeta, c.zeta);
    set!(cfg.critic.acquisition, c.acquisition);
    set!(cfg.critic.refit_max_iters, c.refit_max_iters);

    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(cfg)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, SystemConfig::homogeneous(3, 4));
        assert_eq!(cfg.actor.k_initial, 24);
        assert_eq!(cfg.critic.cache_size, 256);
    }

    #[test]
    fn per_device_and_scalar_forms() {
        let cfg = parse_config(
            "[system]\nn_devices = 2\ntx_power_w = [0.1, 0.2]\nlatency_weight = 0.5\nnative_resolution = [[640, 480], [1280, 720]]\n",
        )
        .unwrap();
        assert_eq!(cfg.tx_power_w, vec![0.1, 0.2]);
        assert_eq!(cfg.latency_weight, vec![0.5, 0.5]);
        assert_eq!(cfg.native_resolution[1], (1280, 720));
        assert_eq!(cfg.actor.k_initial, 16);
    }

    #[test]
    fn noise_conversion() {
        let cfg = parse_config("[system]\nnoise_psd_dbm_per_hz = -174\n").unwrap();
        let want = 10f64.powf(-17.4) * 1e-3;
        assert!((cfg.noise_psd_w_per_hz - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("[system]\nn_devices = 0\n").unwrap_err().to_string();
        assert!(e.contains("N >= 1"), "{e}");
        let e = parse_config("[actor]\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = parse_config("[nope]\nx = 1\n").unwrap_err().to_string();
        assert!(e.contains("nope"), "{e}");
        let e = format!("{:#}", parse_config("[system]\ntx_power_w = [0.1, 0.2]\n").unwrap_err());
        assert!(e.contains("system.tx_power_w"), "{e}");
        let e = format!("{:#}", parse_config("[system]\nbandwidth_hz = -1\n").unwrap_err());
        assert!(e.contains("bandwidth_hz"), "{e}");
    }
}
