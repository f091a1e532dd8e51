//! Training hyperparameters and the exploration schedule.

use serde::{Deserialize, Serialize};

use crate::RlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSchedule {
    pub gamma: f64,
    /// Environment steps collected before any gradient update runs.
    pub start_after: usize,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Target network refresh period, in gradient updates.
    pub target_sync_every: u64,
    /// Interaction pauses for a training round every this many episodes.
    pub round_episodes: u64,
    /// One gradient step per this many environment steps collected since the
    /// previous round; the round executes them in a burst.
    pub steps_per_update: usize,
    pub lr_q: f64,
    pub lr_reward: f64,
    pub eps_initial: f64,
    pub eps_min: f64,
    /// Linear decay per episode.
    pub eps_decay: f64,
}

impl Default for TrainingSchedule {
    fn default() -> Self {
        TrainingSchedule {
            gamma: 0.99,
            start_after: 100_000,
            buffer_capacity: 1_000_000,
            batch_size: 512,
            target_sync_every: 50,
            round_episodes: 250,
            steps_per_update: 50,
            lr_q: 1e-4,
            lr_reward: 1e-4,
            eps_initial: 1.0,
            eps_min: 0.1,
            eps_decay: 1e-4,
        }
    }
}

impl TrainingSchedule {
    /// Exploration rate for an episode: linear decay clamped to the floor.
    pub fn epsilon(&self, episode_index: u64) -> f64 {
        let e = self.eps_initial - self.eps_decay * episode_index as f64;
        e.clamp(self.eps_min, self.eps_initial)
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if self.batch_size == 0
            || self.buffer_capacity == 0
            || self.target_sync_every == 0
            || self.round_episodes == 0
            || self.steps_per_update == 0
        {
            return Err(RlError::Config("schedule knobs must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.eps_min)
            || !(0.0..=1.0).contains(&self.eps_initial)
            || self.eps_min > self.eps_initial
        {
            return Err(RlError::Config("epsilon range must satisfy 0 <= min <= initial <= 1".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(RlError::Config("gamma must be in [0, 1)".into()));
        }
        Ok(())
    }
}
