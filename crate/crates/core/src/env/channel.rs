//! Distance-based path loss with Rayleigh block fading.

use rand::Rng;
use rand_distr::Exp1;

use crate::config::SystemConfig;
use crate::error::{LabError, Result};

const SPEED_OF_LIGHT: f64 = 3e8;

/// Channel gains of one slot. Constant within the slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<f64>,
}

/// Average gain G_A (c / (4π f_c d))^λ.
pub fn mean_gain(distance_m: f64, antenna_gain: f64, carrier_hz: f64, exponent: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(LabError::domain(format!("distance must be > 0, got {distance_m}")));
    }
    Ok(antenna_gain * (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_hz * distance_m)).powf(exponent))
}

/// Draws h = ς·h̄ with ς ~ Exp(1) independently per device.
pub fn sample_channel<R: Rng>(distances: &[f64], cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    let gains = distances
        .iter()
        .map(|&d| {
            let hbar = mean_gain(d, cfg.antenna_gain, cfg.carrier_hz, cfg.pathloss_exponent)?;
            let fade: f64 = rng.sample(Exp1);
            // Exp1 can return exactly 0 with negligible probability; gains must stay positive.
            Ok(hbar * fade.max(f64::MIN_POSITIVE))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelRealization { gains })
}
