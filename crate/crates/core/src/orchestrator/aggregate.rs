use serde::{Deserialize, Serialize};

use super::{RunResult, SlotLog};
use crate::error::{LabError, Result};

/// Long-term averages over a run: per-slot sums over devices, averaged over slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Ū
    pub utility: f64,
    /// τ̄
    pub latency: f64,
    /// ᾱ
    pub confidence: f64,
    /// c̄
    pub accuracy: f64,
    /// K̄
    pub candidates: f64,
    pub decision_ms: f64,
    pub evaluations: f64,
}

impl Aggregates {
    pub fn from_slots(slots: &[SlotLog]) -> Self {
        let m = slots.len().max(1) as f64;
        let mean = |f: &dyn Fn(&SlotLog) -> f64| slots.iter().map(f).sum::<f64>() / m;
        Self {
            utility: mean(&|s| s.record.total_utility),
            latency: mean(&|s| s.record.latencies().iter().sum()),
            confidence: mean(&|s| s.record.confidence.iter().sum()),
            accuracy: mean(&|s| s.record.accuracy.iter().sum()),
            candidates: mean(&|s| s.k_t as f64),
            decision_ms: mean(&|s| s.decision_ms),
            evaluations: mean(&|s| s.evaluations as f64),
        }
    }
}

/// Per-slot U*_t − U_t of `other` against the exhaustive-search run on the same seed.
pub fn optimality_gap(ideal: &RunResult, other: &RunResult) -> Result<Vec<f64>> {
    if ideal.seed != other.seed || ideal.slots.len() != other.slots.len() {
        return Err(LabError::domain("optimality gap needs paired runs (same seed and horizon)"));
    }
    Ok(ideal
        .slots
        .iter()
        .zip(&other.slots)
        .map(|(a, b)| a.record.total_utility - b.record.total_utility)
        .collect())
}

/// Trailing moving average: entry t averages the last `window` values up to t.
pub fn trailing_mean(series: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for (i, &v) in series.iter().enumerate() {
        acc += v;
        if i >= w {
            acc -= series[i - w];
        }
        out.push(acc / (i + 1).min(w) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_window() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        let m = trailing_mean(&s, 2);
        assert_eq!(m, vec![1.0, 1.5, 2.5, 3.5, 4.5]);
        assert_eq!(trailing_mean(&s, 10)[4], 3.0);
    }
}
