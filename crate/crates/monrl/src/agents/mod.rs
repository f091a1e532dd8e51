//! Joint-state DQN agents: replay, models, schedules, the training loop,
//! and checkpointing.

pub mod checkpoint;
pub mod dqn;
pub mod model;
pub mod replay;
pub mod schedule;
