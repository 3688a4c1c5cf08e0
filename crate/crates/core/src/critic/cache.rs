use std::collections::VecDeque;

/// One executed slot as seen by the critic.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Raw channel gains.
    pub h: Vec<f64>,
    pub a: Vec<usize>,
    pub t: usize,
    pub y: f64,
}

/// Fixed-capacity, time-ordered observation window; the oldest entry is evicted
/// on overflow.
#[derive(Debug, Clone)]
pub struct BoCache {
    capacity: usize,
    entries: VecDeque<Observation>,
}

impl BoCache {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "cache capacity must be >= 1");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends `obs`, returning the evicted entry if the cache was full.
    pub fn push(&mut self, obs: Observation) -> Option<Observation> {
        let evicted = if self.entries.len() == self.capacity {
            self.entries.pop_front()
        } else {
            None
        };
        self.entries.push_back(obs);
        evicted
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize) -> &Observation {
        &self.entries[i]
    }

    pub fn targets(&self) -> Vec<f64> {
        self.entries.iter().map(|o| o.y).collect()
    }

    /// Largest observed utility in the window.
    pub fn best_y(&self) -> Option<f64> {
        self.entries.iter().map(|o| o.y).reduce(f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(t: usize) -> Observation {
        Observation { h: vec![1.0], a: vec![0], t, y: t as f64 }
    }

    #[test]
    fn evicts_oldest() {
        let mut c = BoCache::new(3);
        for t in 1..=3 {
            assert!(c.push(obs(t)).is_none());
        }
        assert_eq!(c.push(obs(4)).unwrap().t, 1);
        assert_eq!(c.len(), 3);
        let ts: Vec<usize> = c.iter().map(|o| o.t).collect();
        assert_eq!(ts, vec![2, 3, 4]);
        assert_eq!(c.best_y(), Some(4.0));
    }
}
