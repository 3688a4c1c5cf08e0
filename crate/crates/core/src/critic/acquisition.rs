//! Acquisition functions and candidate selection.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::GpModel;
use crate::config::AcquisitionKind;
use crate::error::{LabError, Result};
use crate::types::DegradationAction;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Scores a posterior (μ, σ). `best_y` is the incumbent for EI/PI.
pub fn acquisition(mu: f64, sigma: f64, kind: AcquisitionKind, zeta: f64, best_y: f64) -> f64 {
    let sigma = sigma.max(0.0);
    match kind {
        AcquisitionKind::Ucb => mu + zeta * sigma,
        AcquisitionKind::Ei => {
            let imp = mu - best_y;
            if sigma == 0.0 {
                return imp.max(0.0);
            }
            let z = imp / sigma;
            let n = std_normal();
            imp * n.cdf(z) + sigma * n.pdf(z)
        }
        AcquisitionKind::Pi => {
            if sigma == 0.0 {
                return if mu > best_y { 1.0 } else { 0.0 };
            }
            std_normal().cdf((mu - best_y) / sigma)
        }
    }
}

/// Outcome of ranking a candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: DegradationAction,
    /// 0-based position in the candidate list.
    pub index: usize,
    /// 1-based position, as used by the candidate-count update.
    pub k_star: usize,
    pub values: Vec<f64>,
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if !(v > values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Picks the candidate with the highest acquisition value at (h, t).
/// `candidates` is expected in the actor's distance order.
pub fn select_action(
    candidates: &[DegradationAction],
    h: &[f64],
    t: usize,
    model: &GpModel,
    kind: AcquisitionKind,
    zeta: f64,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(LabError::domain("empty candidate set"));
    }
    let levels: Vec<&[usize]> = candidates.iter().map(|c| c.levels()).collect();
    let post = model.posterior_batch(h, t, &levels)?;
    let best = model.cache().best_y().unwrap_or(0.0);
    let values: Vec<f64> = post
        .iter()
        .map(|&(mu, var)| acquisition(mu, var.sqrt(), kind, zeta, best))
        .collect();
    let index = argmax_first(&values).expect("non-empty");
    Ok(Selection {
        action: candidates[index].clone(),
        index,
        k_star: index + 1,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ucb_examples() {
        assert_eq!(acquisition(1.3, 5.0, AcquisitionKind::Ucb, 0.0, 0.0), 1.3);
        assert_eq!(acquisition(1.0, 2.0, AcquisitionKind::Ucb, 1.0, 0.0), 3.0);
    }

    #[test]
    fn degenerate_sigma() {
        assert_eq!(acquisition(2.0, 0.0, AcquisitionKind::Ei, 0.0, 1.5), 0.5);
        assert_eq!(acquisition(1.0, 0.0, AcquisitionKind::Ei, 0.0, 1.5), 0.0);
        assert_eq!(acquisition(2.0, 0.0, AcquisitionKind::Pi, 0.0, 1.5), 1.0);
        assert_eq!(acquisition(1.0, 0.0, AcquisitionKind::Pi, 0.0, 1.5), 0.0);
    }

    #[test]
    fn ei_matches_quadrature() {
        // E[max(Y - best, 0)] for Y ~ N(mu, sigma²) by midpoint quadrature
        let (mu, sigma, best) = (0.3, 0.8, 0.5);
        let n = 200_000;
        let (lo, hi) = (mu - 12.0 * sigma, mu + 12.0 * sigma);
        let dx = (hi - lo) / n as f64;
        let mut q = 0.0;
        for i in 0..n {
            let y = lo + (i as f64 + 0.5) * dx;
            let dens = (-(y - mu).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            q += (y - best).max(0.0) * dens * dx;
        }
        let ei = acquisition(mu, sigma, AcquisitionKind::Ei, 0.0, best);
        assert!((ei - q).abs() < 1e-8, "{ei} vs {q}");
        let pi = acquisition(mu, sigma, AcquisitionKind::Pi, 0.0, best);
        assert!(pi > 0.0 && pi < 0.5);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_first(&[]), None);
    }
}
