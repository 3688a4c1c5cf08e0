use std::collections::VecDeque;

use rand::Rng;

/// Fixed-capacity store of (flattened state, one-hot target) pairs.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    items: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "replay capacity must be >= 1");
        Self { capacity, items: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, state: Vec<f64>, target: Vec<f64>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back((state, target));
    }

    /// Uniform minibatch without replacement (the whole memory if smaller).
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<&(Vec<f64>, Vec<f64>)> {
        let m = batch.min(self.items.len());
        rand::seq::index::sample(rng, self.items.len(), m)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<f64>, Vec<f64>)> {
        self.items.iter()
    }
}
