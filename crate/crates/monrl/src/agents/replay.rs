//! FIFO replay buffer with uniform sampling.

use monmdp::AgentStep;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<AgentStep>,
    write_pos: usize,
    total_pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, items: Vec::new(), write_pos: 0, total_pushed: 0 }
    }

    /// Inserts a step, evicting the oldest when full.
    pub fn push(&mut self, step: AgentStep) {
        if self.items.len() < self.capacity {
            self.items.push(step);
        } else {
            self.items[self.write_pos] = step;
        }
        self.write_pos = (self.write_pos + 1) % self.capacity;
        self.total_pushed += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total_pushed(&self) -> u64 {
        self.total_pushed
    }

    /// Write cursor, recorded in checkpoints.
    pub fn cursor(&self) -> usize {
        self.write_pos
    }

    /// Uniform sample with replacement.
    pub fn sample<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a AgentStep {
        &self.items[rng.gen_range(0..self.items.len())]
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentStep> {
        self.items.iter()
    }
}
