//! Reference solver used to cross-check the dual solver.
//!
//! Eliminates τ and solves min Σ w_n d_n / R_n(b_n) s.t. Σ b_n = 1 directly:
//! at the optimum every device's marginal cost w d R'(b) / R(b)² equals a shared
//! multiplier μ. Both μ and each b_n(μ) are found by plain bisection.

use std::f64::consts::LN_2;

use super::{Allocation, AllocationProblem};
use crate::error::Result;
use crate::numeric::bisect_decreasing;

fn marginal_cost(prob: &AllocationProblem, n: usize, b: f64) -> f64 {
    let c = prob.snr_scale(n);
    let rate = prob.rate(n, b);
    let drate = prob.bandwidth_hz / LN_2 * ((c / b).ln_1p() - c / (b + c));
    prob.weights[n] * prob.data_bits[n] * drate / (rate * rate)
}

fn share_at(prob: &AllocationProblem, n: usize, log_mu: f64) -> f64 {
    // marginal cost is decreasing in b
    let lb = bisect_decreasing(|lb| marginal_cost(prob, n, lb.exp()).ln() - log_mu, -300.0, 60.0, 1e-13);
    lb.exp()
}

pub fn oracle_allocation(prob: &AllocationProblem) -> Result<Allocation> {
    prob.validate()?;
    let n_all = prob.len();
    let active = prob.active();
    let mut b = vec![0.0; n_all];
    let mut tau_o = vec![0.0; n_all];
    let mut phi = vec![0.0; n_all];
    if active.is_empty() {
        return Ok(Allocation { b, tau_o, eta: 0.0, phi, objective: 0.0 });
    }
    // total share decreases as the multiplier grows
    let total = |log_mu: f64| active.iter().map(|&n| share_at(prob, n, log_mu)).sum::<f64>() - 1.0;
    let log_mu = bisect_decreasing(total, -700.0, 700.0, 1e-13);
    let mut objective = 0.0;
    for &n in &active {
        b[n] = share_at(prob, n, log_mu);
        let rate = prob.rate(n, b[n]);
        tau_o[n] = prob.data_bits[n] / rate;
        phi[n] = prob.weights[n] * prob.data_bits[n] / (rate * rate);
        objective += prob.weights[n] * tau_o[n];
    }
    Ok(Allocation {
        b,
        tau_o,
        eta: log_mu.exp(),
        phi,
        objective,
    })
}
