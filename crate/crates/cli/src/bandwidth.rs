//! Standalone access to the bandwidth solver.
//!
//! Instance file:
//!
//! ```text
//! # comments and blank lines are ignored
//! bandwidth_hz = 5e6
//! noise_psd_dbm_per_hz = -174     # or noise_psd_w_per_hz
//! d,h,p,w
//! 2.4e6,1e-9,0.2,1
//! 1.2e6,3e-10,0.2,1
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lab_core::bandwidth::{oracle_allocation, solve_allocation, AllocationProblem, KktResiduals};
use lab_core::config::dbm_per_hz_to_watt;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BandwidthReport {
    pub b: Vec<f64>,
    pub tau_o: Vec<f64>,
    pub eta: f64,
    pub phi: Vec<f64>,
    pub objective: f64,
    pub oracle_objective: f64,
    /// Relative objective gap to the oracle.
    pub oracle_objective_delta: f64,
    /// max |Δb| against the oracle.
    pub oracle_b_delta: f64,
    pub kkt: Residuals,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub stationarity: f64,
    pub tightness: f64,
    pub budget: f64,
}

impl From<KktResiduals> for Residuals {
    fn from(r: KktResiduals) -> Self {
        Residuals { stationarity: r.stationarity, tightness: r.tightness, budget: r.budget }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or_default().trim()
}

fn number(s: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| anyhow!("line {line}: {what} '{}' is not a number", s.trim()))?;
    if !v.is_finite() {
        bail!("line {line}: {what} must be finite");
    }
    Ok(v)
}

pub fn parse_instance(text: &str) -> Result<AllocationProblem> {
    let mut bandwidth = None;
    let mut noise = None;
    let mut header_seen = false;
    let mut prob = AllocationProblem {
        data_bits: Vec::new(),
        gains: Vec::new(),
        powers: Vec::new(),
        weights: Vec::new(),
        bandwidth_hz: 0.0,
        noise_psd: 0.0,
    };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            if header_seen {
                bail!("line {ln}: settings must precede the d,h,p,w header");
            }
            match k.trim() {
                "bandwidth_hz" => bandwidth = Some(number(v, "bandwidth_hz", ln)?),
                "noise_psd_w_per_hz" => noise = Some(number(v, "noise_psd_w_per_hz", ln)?),
                "noise_psd_dbm_per_hz" => noise = Some(dbm_per_hz_to_watt(number(v, "noise_psd_dbm_per_hz", ln)?)),
                other => bail!("line {ln}: unknown setting '{other}'"),
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if !header_seen {
            if cols != ["d", "h", "p", "w"] {
                bail!("line {ln}: expected header 'd,h,p,w', found '{line}'");
            }
            header_seen = true;
            continue;
        }
        if cols.len() != 4 {
            bail!("line {ln}: expected 4 columns (d,h,p,w), found {}", cols.len());
        }
        prob.data_bits.push(number(cols[0], "d", ln)?);
        prob.gains.push(number(cols[1], "h", ln)?);
        prob.powers.push(number(cols[2], "p", ln)?);
        prob.weights.push(number(cols[3], "w", ln)?);
    }
    if !header_seen {
        bail!("missing 'd,h,p,w' header");
    }
    if prob.is_empty() {
        bail!("instance has no device rows");
    }
    prob.bandwidth_hz = bandwidth.ok_or_else(|| anyhow!("missing bandwidth_hz"))?;
    prob.noise_psd = noise.ok_or_else(|| anyhow!("missing noise_psd_w_per_hz or noise_psd_dbm_per_hz"))?;
    prob.validate()?;
    Ok(prob)
}

pub fn solve_instance(prob: &AllocationProblem) -> Result<BandwidthReport> {
    let a = solve_allocation(prob)?;
    let o = oracle_allocation(prob)?;
    let b_delta = a.b.iter().zip(&o.b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let obj_delta = if o.objective == 0.0 { (a.objective - o.objective).abs() } else { ((a.objective - o.objective) / o.objective).abs() };
    let kkt = a.kkt_residuals(prob).into();
    Ok(BandwidthReport {
        b: a.b,
        tau_o: a.tau_o,
        eta: a.eta,
        phi: a.phi,
        objective: a.objective,
        oracle_objective: o.objective,
        oracle_objective_delta: obj_delta,
        oracle_b_delta: b_delta,
        kkt,
    })
}

/// `bandwidth`: solves the instance and returns the JSON report; also writes it
/// to `out` when given.
pub fn cmd_bandwidth(instance: &Path, out: Option<&Path>) -> Result<String> {
    let text = std::fs::read_to_string(instance).with_context(|| format!("reading {}", instance.display()))?;
    let prob = parse_instance(&text).with_context(|| format!("in {}", instance.display()))?;
    let report = solve_instance(&prob)?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(json)
}
