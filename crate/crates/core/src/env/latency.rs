//! Data size and latency models for degradation, upload, and edge inference.

use crate::error::{LabError, Result};

/// Bits per RGB pixel (3 channels × 8 bits).
pub const BITS_PER_PIXEL: f64 = 24.0;

/// Payload of a frame downsampled `level` times.
pub fn data_size_bits(resolution: (u32, u32), level: usize) -> Result<f64> {
    let (w, h) = resolution;
    let div = 1u64
        .checked_shl(level as u32)
        .filter(|_| level < 32)
        .ok_or_else(|| LabError::domain(format!("level {level} too large")))?;
    if !(w as u64).is_multiple_of(div) || !(h as u64).is_multiple_of(div) {
        return Err(LabError::domain(format!(
            "resolution ({w}, {h}) not divisible by 2^{level}"
        )));
    }
    Ok((w as u64 / div) as f64 * (h as u64 / div) as f64 * BITS_PER_PIXEL)
}

/// Gaussian-pyramid cost: every level k = 1..=a reduces a frame with 4^-(k-1) of the
/// native pixel count.
pub fn degradation_latency(pixels: f64, level: usize, device_efficiency: f64) -> Result<f64> {
    if !(device_efficiency > 0.0) {
        return Err(LabError::domain("device efficiency must be > 0"));
    }
    let factor: f64 = (1..=level).map(|k| 0.25f64.powi(k as i32 - 1)).sum();
    Ok(pixels * factor / device_efficiency)
}

/// Detector latency κ₀ + pixels·4^-a / ψ.
pub fn edge_compute_latency(pixels: f64, level: usize, server_efficiency: f64, overhead_s: f64) -> Result<f64> {
    if !(server_efficiency > 0.0) {
        return Err(LabError::domain("server efficiency must be > 0"));
    }
    Ok(overhead_s + pixels * 0.25f64.powi(level as i32) / server_efficiency)
}

/// Shannon rate b·W·log₂(1 + p·h / (b·W·δ²)); zero at b = 0.
pub fn uplink_rate(b: f64, bandwidth_hz: f64, power_w: f64, gain: f64, noise_psd: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let bw = b * bandwidth_hz;
    bw * (power_w * gain / (bw * noise_psd)).ln_1p() / std::f64::consts::LN_2
}

/// Upload time d / R(b). Returns `+∞` when no bandwidth is granted.
pub fn transmission_time(
    bits: f64,
    b: f64,
    gain: f64,
    bandwidth_hz: f64,
    power_w: f64,
    noise_psd: f64,
) -> Result<f64> {
    if !(gain > 0.0) {
        return Err(LabError::domain(format!("channel gain must be > 0, got {gain}")));
    }
    if !(0.0..=1.0 + 1e-12).contains(&b) {
        return Err(LabError::domain(format!("bandwidth fraction {b} outside [0, 1]")));
    }
    if bits == 0.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(bits / uplink_rate(b, bandwidth_hz, power_w, gain, noise_psd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_size_examples() {
        assert_eq!(data_size_bits((1920, 1200), 0).unwrap(), 55_296_000.0);
        assert_eq!(data_size_bits((1920, 1200), 1).unwrap(), 13_824_000.0);
        for a in 0..3 {
            let d0 = data_size_bits((1920, 1200), a).unwrap();
            let d1 = data_size_bits((1920, 1200), a + 1).unwrap();
            assert_eq!(d0, 4.0 * d1);
        }
        assert!(data_size_bits((1921, 1200), 1).is_err());
    }

    #[test]
    fn degradation_examples() {
        assert_eq!(degradation_latency(2.304e6, 0, 1e8).unwrap(), 0.0);
        let t = degradation_latency(2.304e6, 2, 1e8).unwrap();
        assert!((t - 0.0288).abs() < 1e-15);
        let mut prev = 0.0;
        for a in 0..6 {
            let t = degradation_latency(2.304e6, a, 1e8).unwrap();
            assert!(t >= prev);
            prev = t;
        }
        assert!(degradation_latency(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn compute_examples() {
        let t = edge_compute_latency(2.304e6, 0, 2e8, 0.01).unwrap();
        assert!((t - 0.02152).abs() < 1e-15);
        let var = |psi| edge_compute_latency(2.304e6, 1, psi, 0.0).unwrap();
        assert!((var(2e8) - 2.0 * var(4e8)).abs() < 1e-15);
        let best = (0..4)
            .map(|a| edge_compute_latency(2.304e6, a, 2e8, 0.01).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, edge_compute_latency(2.304e6, 3, 2e8, 0.01).unwrap());
        assert!(edge_compute_latency(1.0, 0, -1.0, 0.0).is_err());
    }

    #[test]
    fn transmission_examples() {
        // p·h/(Wδ²) = 1 with b = 1 → rate = W·log₂2 = W.
        let (w, noise) = (5e6, 1e-20);
        let gain = w * noise / 0.1;
        let t = transmission_time(5e6, 1.0, gain, w, 0.1, noise).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        let t2 = transmission_time(1e7, 1.0, gain, w, 0.1, noise).unwrap();
        assert!((t2 - 2.0 * t).abs() < 1e-12);
        assert_eq!(transmission_time(1.0, 0.0, gain, w, 0.1, noise).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rate_increasing_and_concave_in_b() {
        let rate = |b: f64| uplink_rate(b, 5e6, 0.1, 5e-9, 4e-21);
        let h = 1e-4;
        let mut b = 0.01;
        while b < 0.99 {
            let d1 = (rate(b + h) - rate(b - h)) / (2.0 * h);
            let d2 = (rate(b + h) - 2.0 * rate(b) + rate(b - h)) / (h * h);
            assert!(d1 > 0.0, "not increasing at {b}");
            assert!(d2 < 0.0, "not concave at {b}");
            b += 0.01;
        }
    }
}
