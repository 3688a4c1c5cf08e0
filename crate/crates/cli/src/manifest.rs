//! Run manifests: what was run, with which configuration, and its identity hash.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use lab_core::config::default_k_initial;
use lab_core::orchestrator::PolicyKind;
use lab_core::SystemConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Artifact version recorded in every manifest.
pub fn artifact_version() -> String {
    format!("lab-cli {}", env!("CARGO_PKG_VERSION"))
}

/// Parameter varied across the points of a bench.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKey {
    /// Latency weight w applied to every device.
    Weight,
    /// Path-loss exponent λ.
    Pathloss,
    /// Number of devices N.
    Devices,
}

impl SweepKey {
    pub fn name(self) -> &'static str {
        match self {
            SweepKey::Weight => "weight",
            SweepKey::Pathloss => "pathloss",
            SweepKey::Devices => "devices",
        }
    }
}

impl fmt::Display for SweepKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = anyhow::Error;

    /// `key=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (k, vals) = s.split_once('=').ok_or_else(|| anyhow!("sweep must look like key=v1,v2,..."))?;
        let key = match k.trim() {
            "weight" | "w" => SweepKey::Weight,
            "pathloss" | "lambda" => SweepKey::Pathloss,
            "devices" | "n" => SweepKey::Devices,
            other => bail!("unknown sweep key '{other}' (weight, pathloss, devices)"),
        };
        let values = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("sweep value '{v}' is not a number")))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("sweep needs at least one value");
        }
        if key == SweepKey::Devices && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            bail!("devices sweep values must be positive integers");
        }
        Ok(Sweep { key, values })
    }
}

/// Directory name of one sweep point.
pub fn point_label(key: SweepKey, value: f64) -> String {
    format!("{}={}", key.name(), value)
}

/// Configuration of one sweep point derived from the base configuration.
pub fn apply_sweep(base: &SystemConfig, key: SweepKey, value: f64) -> Result<SystemConfig> {
    let mut cfg = base.clone();
    match key {
        SweepKey::Weight => cfg = cfg.with_weight(value),
        SweepKey::Pathloss => cfg.pathloss_exponent = value,
        SweepKey::Devices => {
            let n = value as usize;
            let keep_k = base.actor.k_initial != default_k_initial(base.n_devices, base.n_levels);
            cfg.n_devices = n;
            cfg.tx_power_w = vec![base.tx_power_w[0]; n];
            cfg.latency_weight = vec![base.latency_weight[0]; n];
            cfg.native_resolution = vec![base.native_resolution[0]; n];
            cfg.device_efficiency = vec![base.device_efficiency[0]; n];
            if !keep_k {
                cfg.actor.k_initial = default_k_initial(n, base.n_levels);
            }
        }
    }
    cfg.validate().map_err(|e| anyhow!("sweep point {}: {e}", point_label(key, value)))?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: SystemConfig,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyKind>,
    pub sweep: Option<Sweep>,
    /// Whether per-slot wall-clock timings were written.
    pub timing: bool,
    /// Output files relative to the manifest directory.
    pub outputs: Vec<String>,
    pub hash: String,
}

#[derive(Serialize)]
struct Identity<'a> {
    version: &'a str,
    config: &'a SystemConfig,
    seeds: &'a [u64],
    policies: &'a [PolicyKind],
    sweep: &'a Option<Sweep>,
    timing: bool,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: SystemConfig,
        seeds: Vec<u64>,
        policies: Vec<PolicyKind>,
        sweep: Option<Sweep>,
        timing: bool,
    ) -> Self {
        let mut m = Self {
            version: artifact_version(),
            command: command.to_string(),
            config,
            seeds,
            policies,
            sweep,
            timing,
            outputs: Vec::new(),
            hash: String::new(),
        };
        m.hash = m.compute_hash();
        m
    }

    /// SHA-256 over everything that determines the results (output paths excluded).
    pub fn compute_hash(&self) -> String {
        let id = Identity {
            version: &self.version,
            config: &self.config,
            seeds: &self.seeds,
            policies: &self.policies,
            sweep: &self.sweep,
            timing: self.timing,
        };
        let bytes = serde_json::to_vec(&id).expect("manifest serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn short_hash(&self) -> &str {
        &self.hash[..16]
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.compute_hash() != m.hash {
            bail!("{}: manifest hash does not match its contents", path.display());
        }
        Ok(m)
    }
}
