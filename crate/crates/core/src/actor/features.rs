//! Flattening of the slot state into network inputs.

use crate::error::{LabError, Result};
use crate::types::{SlotObservation, SlotState};

/// Cap applied to non-finite latencies (seconds).
pub const LATENCY_CAP_S: f64 = 1e3;

/// Inputs contributed by one slot: per device log10 gain, confidence, latency,
/// previous-level one-hot and bandwidth share, plus the slot utility.
pub fn slot_feature_dim(n_devices: usize, n_levels: usize) -> usize {
    n_devices * (n_levels + 4) + 1
}

pub fn feature_dim(n_devices: usize, n_levels: usize, history_len: usize) -> usize {
    history_len * slot_feature_dim(n_devices, n_levels)
}

fn push_slot(out: &mut Vec<f64>, o: &SlotObservation, n: usize, n_levels: usize) -> Result<()> {
    let lens = [
        o.channel_gains.len(),
        o.prev_confidences.len(),
        o.prev_latencies.len(),
        o.prev_action.len(),
        o.prev_bandwidth.len(),
    ];
    if let Some(&bad) = lens.iter().find(|&&l| l != n) {
        return Err(LabError::Shape { expected: n, got: bad });
    }
    out.extend(o.channel_gains.iter().map(|&h| if h > 0.0 { h.log10() } else { 0.0 }));
    out.extend(o.prev_confidences.iter().copied());
    out.extend(o.prev_latencies.iter().map(|&l| if l.is_finite() { l.min(LATENCY_CAP_S) } else { LATENCY_CAP_S }));
    for &a in &o.prev_action {
        if a >= n_levels {
            return Err(LabError::domain(format!("level {a} outside 0..{n_levels}")));
        }
        out.extend((0..n_levels).map(|i| if i == a { 1.0 } else { 0.0 }));
    }
    out.extend(o.prev_bandwidth.iter().copied());
    out.push(if o.prev_utility.is_finite() { o.prev_utility } else { 0.0 });
    Ok(())
}

/// Oldest slot first; the slot index itself is not an input.
pub fn state_features(state: &SlotState, n_devices: usize, n_levels: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(feature_dim(n_devices, n_levels, state.len()));
    for o in state.history() {
        push_slot(&mut out, o, n_devices, n_levels)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut o = SlotObservation::zero(2);
        o.channel_gains = vec![1e-8, 0.0];
        o.prev_confidences = vec![0.5, 1.5];
        o.prev_latencies = vec![0.2, f64::INFINITY];
        o.prev_action = vec![2, 0];
        o.prev_bandwidth = vec![0.25, 0.75];
        o.prev_utility = 1.2;
        let s = SlotState::from_recent(&[o], 1, 2);
        let f = state_features(&s, 2, 3).unwrap();
        assert_eq!(f.len(), slot_feature_dim(2, 3));
        assert_eq!(
            f,
            vec![-8.0, 0.0, 0.5, 1.5, 0.2, LATENCY_CAP_S, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.25, 0.75, 1.2]
        );
    }

    #[test]
    fn history_is_padded() {
        let s = SlotState::from_recent(&[], 3, 2);
        assert_eq!(state_features(&s, 2, 4).unwrap().len(), feature_dim(2, 4, 3));
    }
}
