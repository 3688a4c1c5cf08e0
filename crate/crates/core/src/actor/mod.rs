//! Learned candidate generator: a preference network, the two-stream
//! quantiser, adaptive candidate counts and replay training.

mod candidates;
mod features;
mod memory;
mod net;

use std::collections::VecDeque;

pub use candidates::{argmax_action, generate_candidates, softmax, update_k, Candidate};
pub use features::{feature_dim, slot_feature_dim, state_features, LATENCY_CAP_S};
pub use memory::ReplayMemory;
pub use net::{bce_loss, clip_global_norm, Adam, PreferenceNet};

use crate::config::{ActorParams, SystemConfig};
use crate::error::Result;
use crate::rng::{LabRng, SeedTree, LABEL_ACTOR_INIT, LABEL_ACTOR_NOISE, LABEL_ACTOR_SAMPLE};
use crate::types::{encode_one_hot, DegradationAction, SlotState};

/// Network, optimiser, replay memory and candidate-count state of one run.
#[derive(Debug, Clone)]
pub struct Actor {
    n_devices: usize,
    n_levels: usize,
    params: ActorParams,
    net: PreferenceNet,
    adam: Adam,
    memory: ReplayMemory,
    k: usize,
    k_window: VecDeque<usize>,
    candidate_rng: LabRng,
    batch_rng: LabRng,
}

impl Actor {
    pub fn new(cfg: &SystemConfig, seeds: &SeedTree) -> Result<Self> {
        let (n, a) = (cfg.n_devices, cfg.n_levels);
        let p = cfg.actor.clone();
        let net = PreferenceNet::new(feature_dim(n, a, p.history_len), &p.hidden, n * a, &mut seeds.stream(LABEL_ACTOR_INIT))?;
        let adam = Adam::new(net.params().len(), p.learning_rate);
        Ok(Self {
            n_devices: n,
            n_levels: a,
            memory: ReplayMemory::new(p.memory_size),
            k: p.k_initial,
            k_window: VecDeque::with_capacity(p.k_interval.max(1)),
            candidate_rng: seeds.stream(LABEL_ACTOR_NOISE),
            batch_rng: seeds.stream(LABEL_ACTOR_SAMPLE),
            net,
            adam,
            params: p,
        })
    }

    pub fn net(&self) -> &PreferenceNet {
        &self.net
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    /// Candidate count used for the next decision.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn features(&self, state: &SlotState) -> Result<Vec<f64>> {
        state_features(state, self.n_devices, self.n_levels)
    }

    pub fn preferences(&self, state: &SlotState) -> Result<Vec<f64>> {
        self.net.forward(&self.features(state)?)
    }

    /// Preference vector and the sorted candidate list for the current K.
    pub fn propose(&mut self, state: &SlotState) -> Result<(Vec<f64>, Vec<Candidate>)> {
        let prefs = self.preferences(state)?;
        let c = generate_candidates(&prefs, self.n_levels, self.k, &mut self.candidate_rng);
        Ok((prefs, c))
    }

    /// Stores the executed (state, action) pair.
    pub fn remember(&mut self, state: &SlotState, action: &DegradationAction) -> Result<()> {
        let x = self.features(state)?;
        let y = encode_one_hot(action, self.n_levels)?.as_f64();
        self.memory.push(x, y);
        Ok(())
    }

    /// Records the selected position k* of slot `t` and applies the K update
    /// when `t` hits the update interval.
    pub fn observe_k_star(&mut self, k_star: usize, t: usize) {
        let w = self.params.k_interval.max(1);
        if self.k_window.len() == w {
            self.k_window.pop_front();
        }
        self.k_window.push_back(k_star);
        let window: Vec<usize> = self.k_window.iter().copied().collect();
        self.k = update_k(&window, self.k, self.params.k_initial, t, self.params.k_interval);
    }

    /// One Adam step on a uniform minibatch; `None` while the memory holds
    /// fewer than half its capacity.
    pub fn train_step(&mut self) -> Result<Option<f64>> {
        if self.memory.len() < self.memory.capacity().div_ceil(2) || self.memory.is_empty() {
            return Ok(None);
        }
        let batch = self.memory.sample(self.params.batch_size, &mut self.batch_rng);
        let xs: Vec<&[f64]> = batch.iter().map(|e| e.0.as_slice()).collect();
        let ys: Vec<&[f64]> = batch.iter().map(|e| e.1.as_slice()).collect();
        let (loss, mut grad) = self.net.loss_and_grad(&xs, &ys)?;
        clip_global_norm(&mut grad, self.params.grad_clip);
        self.adam.step(self.net.params_mut(), &grad);
        Ok(Some(loss))
    }

    /// Trains when `t` is a multiple of the training interval.
    pub fn maybe_train(&mut self, t: usize) -> Result<Option<f64>> {
        let d = self.params.train_interval.max(1);
        if !t.is_multiple_of(d) {
            return Ok(None);
        }
        self.train_step()
    }
}
