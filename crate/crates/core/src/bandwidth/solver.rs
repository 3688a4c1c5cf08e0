use std::f64::consts::LN_2;

use super::lambert::w0_with_offset;
use super::{Allocation, AllocationProblem};
use crate::error::{LabError, Result};
use crate::numeric::brent;

const ETA_LO: f64 = 1e-12;
const ETA_HI: f64 = 1e12;

/// Closed-form optimal share for given duals:
/// b = -p·h / (W·δ²·[1 + 1/W₀(-exp(-(1 + η ln2/(φ W))))]).
///
/// `η = 0` makes the share unbounded and is reported as a domain error.
pub fn b_from_duals(eta: f64, phi: f64, power: f64, gain: f64, bandwidth_hz: f64, noise_psd: f64) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(LabError::domain(format!("phi must be > 0, got {phi}")));
    }
    if eta == 0.0 {
        return Err(LabError::domain("eta = 0 leaves the bandwidth share unbounded"));
    }
    if !(eta > 0.0) {
        return Err(LabError::domain(format!("eta must be > 0, got {eta}")));
    }
    let q = eta * LN_2 / (phi * bandwidth_hz);
    Ok(share_from_ratio(q, power * gain / (bandwidth_hz * noise_psd)))
}

/// Share as a function of q = η ln2 / (φ W) and c = p·h / (W·δ²).
fn share_from_ratio(q: f64, c: f64) -> f64 {
    let x = -(-(1.0 + q)).exp();
    // 1 + e·x = 1 - e^{-q}, evaluated without cancellation
    let offset = -(-q).exp_m1();
    let w = w0_with_offset(x, offset);
    if w == 0.0 {
        return 0.0;
    }
    -c / (1.0 + 1.0 / w)
}

/// g(x) = ln x + 1/x − 1 for x = 1 + y, accurate for small y.
fn stationarity_gap(y: f64) -> f64 {
    if y < 1e-3 {
        // Σ_{k≥2} (-1)^k (k-1) y^k / k
        let mut term = y * y;
        let mut sum = 0.0;
        for k in 2..12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (k as f64 - 1.0) / k as f64 * term;
            term *= y;
        }
        sum
    } else {
        y.ln_1p() - y / (1.0 + y)
    }
}

/// Per-device solution for a fixed band price.
#[derive(Debug, Clone, Copy)]
struct DeviceDual {
    /// ln(c/b): log of the per-band SNR at the solution.
    log_snr: f64,
    phi: f64,
}

/// For band price η, solve the tight rate constraint of device `n` for its
/// multiplier φ. Works in u = ln(c/b) where stationarity gives
/// φ = η ln2 / (W g(1 + e^u)) and the constraint reads R(b)² φ = d·w.
fn device_dual(prob: &AllocationProblem, n: usize, eta: f64, warm: Option<f64>) -> DeviceDual {
    let c = prob.snr_scale(n);
    let w_hz = prob.bandwidth_hz;
    let k = 2.0 * (c * w_hz / LN_2).ln() + (eta * LN_2 / w_hz).ln() - (prob.data_bits[n] * prob.weights[n]).ln();
    // decreasing in u
    let h = |u: f64| {
        let y = u.exp();
        let lnx = y.ln_1p();
        k + 2.0 * lnx.ln() - 2.0 * u - stationarity_gap(y).ln()
    };
    let (mut lo, mut hi) = match warm {
        Some(u0) => (u0 - 1.0, u0 + 1.0),
        None => (-40.0, 40.0),
    };
    let mut width = hi - lo;
    while h(lo) < 0.0 && lo > -740.0 {
        width *= 2.0;
        lo -= width;
    }
    while h(hi) > 0.0 && hi < 740.0 {
        width *= 2.0;
        hi += width;
    }
    let u = brent(h, lo.max(-740.0), hi.min(740.0), 1e-14, 300).unwrap_or(0.5 * (lo + hi));
    let y = u.exp();
    DeviceDual {
        log_snr: u,
        phi: eta * LN_2 / (w_hz * stationarity_gap(y)),
    }
}

/// KKT residuals of an allocation, all relative.
#[derive(Debug, Clone, PartialEq)]
pub struct KktResiduals {
    /// |∂L/∂b_n| / η, max over active devices.
    pub stationarity: f64,
    /// |d_n/τ_n − R_n(b_n)| / R_n(b_n), max over active devices.
    pub tightness: f64,
    /// |Σ b − 1|.
    pub budget: f64,
    /// |τ_n − √(φ_n d_n / w_n)| / τ_n, max over active devices.
    pub tau_form: f64,
}

impl Allocation {
    /// Checks the optimality conditions against `prob`.
    pub fn kkt_residuals(&self, prob: &AllocationProblem) -> KktResiduals {
        let mut r = KktResiduals {
            stationarity: 0.0,
            tightness: 0.0,
            budget: (self.b.iter().sum::<f64>() - 1.0).abs(),
            tau_form: 0.0,
        };
        for n in prob.active() {
            let b = self.b[n];
            let c = prob.snr_scale(n);
            let dldb = -self.phi[n] * prob.bandwidth_hz / LN_2 * ((c / b).ln_1p() - c / (b + c)) + self.eta;
            r.stationarity = r.stationarity.max((dldb / self.eta).abs());
            let rate = prob.rate(n, b);
            r.tightness = r.tightness.max(((prob.data_bits[n] / self.tau_o[n] - rate) / rate).abs());
            let tau = (self.phi[n] * prob.data_bits[n] / prob.weights[n]).sqrt();
            r.tau_form = r.tau_form.max(((self.tau_o[n] - tau) / self.tau_o[n]).abs());
        }
        r
    }
}

/// Exact dual solution of the allocation problem.
pub fn solve_allocation(prob: &AllocationProblem) -> Result<Allocation> {
    prob.validate()?;
    let n_all = prob.len();
    let active = prob.active();
    if active.is_empty() {
        return Ok(Allocation {
            b: vec![0.0; n_all],
            tau_o: vec![0.0; n_all],
            eta: 0.0,
            phi: vec![0.0; n_all],
            objective: 0.0,
        });
    }

    let mut warm: Vec<Option<f64>> = vec![None; n_all];
    // Σ b(η) − 1 in s = ln η; decreasing in s.
    let mut excess = |s: f64| {
        let eta = s.exp();
        let mut total = 0.0;
        for &n in &active {
            let dd = device_dual(prob, n, eta, warm[n]);
            warm[n] = Some(dd.log_snr);
            total += prob.snr_scale(n) / dd.log_snr.exp();
        }
        (total - 1.0).clamp(-1e300, 1e300)
    };

    let (mut lo, mut hi) = (ETA_LO.ln(), ETA_HI.ln());
    while excess(lo) < 0.0 && lo > -700.0 {
        lo -= 50.0;
    }
    while excess(hi) > 0.0 && hi < 700.0 {
        hi += 50.0;
    }
    let s = brent(&mut excess, lo, hi, 1e-15, 400)
        .ok_or_else(|| LabError::Numerical("failed to bracket the bandwidth price".into()))?;
    let eta = s.exp();

    let mut b = vec![0.0; n_all];
    let mut tau_o = vec![0.0; n_all];
    let mut phi = vec![0.0; n_all];
    let mut objective = 0.0;
    for &n in &active {
        let dd = device_dual(prob, n, eta, warm[n]);
        phi[n] = dd.phi;
        b[n] = b_from_duals(eta, dd.phi, prob.powers[n], prob.gains[n], prob.bandwidth_hz, prob.noise_psd)?;
        tau_o[n] = (dd.phi * prob.data_bits[n] / prob.weights[n]).sqrt();
        objective += prob.weights[n] * tau_o[n];
    }
    if !(eta > 0.0) || b.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Numerical(format!("degenerate dual solution eta = {eta}")));
    }
    Ok(Allocation {
        b,
        tau_o,
        eta,
        phi,
        objective,
    })
}
