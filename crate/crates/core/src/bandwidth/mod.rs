//! Per-slot bandwidth allocation for a fixed degradation action.
//!
//! Minimises the weighted upload time Σ w_n τ_n subject to Σ b_n ≤ 1 and the
//! per-device rate constraint d_n / τ_n ≤ R_n(b_n). The exact solver works on
//! the Lagrangian dual: for a bandwidth price η each device's rate multiplier
//! φ_n is found from its tight rate constraint, the closed-form share b_n(η, φ_n)
//! follows through the Lambert W function, and η is adjusted until the shares
//! fill the band.

mod lambert;
mod oracle;
mod solver;

pub use lambert::{lambert_w0, BRANCH_POINT};
pub use oracle::oracle_allocation;
pub use solver::{b_from_duals, solve_allocation, KktResiduals};

use crate::error::{LabError, Result};

/// Inputs of one allocation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    pub data_bits: Vec<f64>,
    pub gains: Vec<f64>,
    pub powers: Vec<f64>,
    pub weights: Vec<f64>,
    pub bandwidth_hz: f64,
    pub noise_psd: f64,
}

/// Optimal shares, upload times and dual certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub b: Vec<f64>,
    pub tau_o: Vec<f64>,
    pub eta: f64,
    pub phi: Vec<f64>,
    pub objective: f64,
}

impl AllocationProblem {
    pub fn len(&self) -> usize {
        self.data_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data_bits.is_empty()
    }

    /// p·h / (W·δ²): SNR of device `n` if it held the whole band, times b.
    pub(crate) fn snr_scale(&self, n: usize) -> f64 {
        self.powers[n] * self.gains[n] / (self.bandwidth_hz * self.noise_psd)
    }

    pub(crate) fn rate(&self, n: usize, b: f64) -> f64 {
        crate::env::uplink_rate(b, self.bandwidth_hz, self.powers[n], self.gains[n], self.noise_psd)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.data_bits.len();
        for (name, len) in [
            ("gains", self.gains.len()),
            ("powers", self.powers.len()),
            ("weights", self.weights.len()),
        ] {
            if len != n {
                return Err(LabError::domain(format!("{name} has {len} entries, expected {n}")));
            }
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(LabError::domain("bandwidth must be > 0"));
        }
        if !(self.noise_psd > 0.0 && self.noise_psd.is_finite()) {
            return Err(LabError::domain("noise PSD must be > 0"));
        }
        for i in 0..n {
            if !(self.data_bits[i] >= 0.0 && self.data_bits[i].is_finite()) {
                return Err(LabError::domain(format!("data size of device {i} must be >= 0")));
            }
            if self.data_bits[i] == 0.0 {
                continue;
            }
            for (name, v) in [
                ("gain", self.gains[i]),
                ("power", self.powers[i]),
                ("weight", self.weights[i]),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(LabError::domain(format!("{name} of device {i} must be > 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Devices with a non-empty payload.
    pub(crate) fn active(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.data_bits[i] > 0.0).collect()
    }

    /// Σ w_n d_n / R_n(b_n) for an arbitrary split.
    pub fn objective_at(&self, b: &[f64]) -> f64 {
        (0..self.len())
            .filter(|&i| self.data_bits[i] > 0.0)
            .map(|i| self.weights[i] * self.data_bits[i] / self.rate(i, b[i]))
            .sum()
    }
}
