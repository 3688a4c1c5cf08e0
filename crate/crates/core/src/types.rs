//! Actions, their one-hot images, and the per-slot observation state.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Degradation level per device; level `a` halves each image dimension `a` times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegradationAction {
    levels: Vec<usize>,
}

impl DegradationAction {
    pub fn new(levels: Vec<usize>, n_levels: usize) -> Result<Self> {
        if let Some((n, &a)) = levels.iter().enumerate().find(|(_, &a)| a >= n_levels) {
            return Err(LabError::domain(format!(
                "level {a} of device {n} outside 0..{n_levels}"
            )));
        }
        Ok(Self { levels })
    }

    /// All devices at the same level.
    pub fn uniform(n_devices: usize, level: usize) -> Self {
        Self {
            levels: vec![level; n_devices],
        }
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Mixed-radix index of the action in the enumeration of A^N actions
    /// (device 0 is the most significant digit).
    pub fn index(&self, n_levels: usize) -> usize {
        self.levels.iter().fold(0, |acc, &a| acc * n_levels + a)
    }

    /// Inverse of [`DegradationAction::index`].
    pub fn from_index(mut idx: usize, n_devices: usize, n_levels: usize) -> Self {
        let mut levels = vec![0; n_devices];
        for slot in levels.iter_mut().rev() {
            *slot = idx % n_levels;
            idx /= n_levels;
        }
        Self { levels }
    }

    /// Iterator over the full action space in index order.
    pub fn enumerate_all(
        n_devices: usize,
        n_levels: usize,
    ) -> impl Iterator<Item = DegradationAction> {
        let total = crate::config::action_space_size(n_devices, n_levels).unwrap_or(usize::MAX);
        (0..total).map(move |i| DegradationAction::from_index(i, n_devices, n_levels))
    }
}

/// Concatenation of N one-hot blocks of length A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotAction {
    bits: Vec<u8>,
}

impl OneHotAction {
    /// Wraps raw bits; validity is checked on decode.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

pub fn encode_one_hot(action: &DegradationAction, n_levels: usize) -> Result<OneHotAction> {
    let mut bits = vec![0u8; action.len() * n_levels];
    for (n, &a) in action.levels().iter().enumerate() {
        if a >= n_levels {
            return Err(LabError::domain(format!(
                "level {a} of device {n} outside 0..{n_levels}"
            )));
        }
        bits[n * n_levels + a] = 1;
    }
    Ok(OneHotAction { bits })
}

pub fn decode_one_hot(one_hot: &OneHotAction, n_levels: usize) -> Result<DegradationAction> {
    if n_levels == 0 || !one_hot.bits.len().is_multiple_of(n_levels) {
        return Err(LabError::domain(format!(
            "bit length {} is not a multiple of A = {n_levels}",
            one_hot.bits.len()
        )));
    }
    let mut levels = Vec::with_capacity(one_hot.bits.len() / n_levels);
    for (n, block) in one_hot.bits.chunks(n_levels).enumerate() {
        let mut set = block.iter().enumerate().filter(|(_, &b)| b != 0);
        match (set.next(), set.next()) {
            (Some((i, &1)), None) => levels.push(i),
            _ => {
                return Err(LabError::domain(format!("block {n} is not one-hot: {block:?}")));
            }
        }
    }
    Ok(DegradationAction { levels })
}

/// What the controller knows at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotObservation {
    pub channel_gains: Vec<f64>,
    pub prev_confidences: Vec<f64>,
    pub prev_latencies: Vec<f64>,
    pub prev_action: Vec<usize>,
    pub prev_bandwidth: Vec<f64>,
    pub prev_utility: f64,
    pub slot_index: usize,
}

impl SlotObservation {
    /// All-zero observation used for the first slot's history and for padding.
    pub fn zero(n_devices: usize) -> Self {
        Self {
            channel_gains: vec![0.0; n_devices],
            prev_confidences: vec![0.0; n_devices],
            prev_latencies: vec![0.0; n_devices],
            prev_action: vec![0; n_devices],
            prev_bandwidth: vec![0.0; n_devices],
            prev_utility: 0.0,
            slot_index: 0,
        }
    }

    pub fn n_devices(&self) -> usize {
        self.channel_gains.len()
    }
}

/// Fixed-length window of the most recent observations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotState {
    history: Vec<SlotObservation>,
}

impl SlotState {
    /// Builds the state from the trailing `len` entries of `recent`, left-padding with
    /// zero observations when fewer are available.
    pub fn from_recent(recent: &[SlotObservation], len: usize, n_devices: usize) -> Self {
        let take = recent.len().min(len);
        let mut history = Vec::with_capacity(len);
        history.extend((0..len - take).map(|_| SlotObservation::zero(n_devices)));
        history.extend_from_slice(&recent[recent.len() - take..]);
        Self { history }
    }

    pub fn history(&self) -> &[SlotObservation] {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Most recent observation.
    pub fn current(&self) -> &SlotObservation {
        self.history.last().expect("state holds at least one observation")
    }
}
