//! Candidate generation from the preference scores and candidate-count adaptation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::types::{DegradationAction, OneHotAction};

/// One candidate action with its distance to the preference vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub action: DegradationAction,
    pub one_hot: OneHotAction,
    pub distance: f64,
}

/// Index of the largest score, lowest index on ties.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Softmax probabilities of one device block.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn make(levels: Vec<usize>, prefs: &[f64], n_levels: usize) -> Candidate {
    let mut bits = vec![0u8; prefs.len()];
    for (n, &a) in levels.iter().enumerate() {
        bits[n * n_levels + a] = 1;
    }
    let distance = bits
        .iter()
        .zip(prefs)
        .map(|(&b, &p)| (b as f64 - p).powi(2))
        .sum::<f64>()
        .sqrt();
    Candidate {
        action: DegradationAction::new(levels, n_levels).expect("levels sampled in range"),
        one_hot: OneHotAction::from_bits(bits),
        distance,
    }
}

/// Per-device argmax of the preference blocks.
pub fn argmax_action(prefs: &[f64], n_levels: usize) -> DegradationAction {
    let levels = prefs.chunks(n_levels).map(argmax).collect();
    DegradationAction::new(levels, n_levels).expect("argmax in range")
}

/// Builds `k` candidates: the per-device argmax first, then softmax samples of the
/// raw scores for positions 2..⌊k/2⌋, then softmax samples of independently
/// perturbed scores for the rest. Duplicates are kept; the result is stably
/// sorted by L2 distance to `prefs`.
pub fn generate_candidates<R: Rng + ?Sized>(prefs: &[f64], n_levels: usize, k: usize, rng: &mut R) -> Vec<Candidate> {
    assert!(n_levels >= 1 && prefs.len().is_multiple_of(n_levels), "preference length must be a multiple of A");
    let k = k.max(1);
    let mut out = Vec::with_capacity(k);
    out.push(make(prefs.chunks(n_levels).map(argmax).collect(), prefs, n_levels));
    let direct = (k / 2).max(1);
    let probs: Vec<Vec<f64>> = prefs.chunks(n_levels).map(softmax).collect();
    for _ in 1..direct {
        let levels = probs.iter().map(|p| sample_index(p, rng)).collect();
        out.push(make(levels, prefs, n_levels));
    }
    while out.len() < k {
        let noisy: Vec<f64> = prefs.iter().map(|p| p + rng.sample::<f64, _>(StandardNormal)).collect();
        let levels = noisy.chunks(n_levels).map(|b| sample_index(&softmax(b), rng)).collect();
        out.push(make(levels, prefs, n_levels));
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    out
}

/// Candidate count for slot `t`: `k1` at t = 1, re-derived from the recent k*
/// values every `interval` slots, unchanged otherwise.
pub fn update_k(window: &[usize], k_prev: usize, k1: usize, t: usize, interval: usize) -> usize {
    if t <= 1 {
        return k1;
    }
    if interval == 0 || !t.is_multiple_of(interval) {
        return k_prev;
    }
    match window.iter().max() {
        Some(&m) => (m + 1).min(k1),
        None => k_prev,
    }
}
