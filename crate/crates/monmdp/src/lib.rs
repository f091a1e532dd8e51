//! Monitored Markov decision processes: the joint-state formalism, the step
//! contract, and the plant-watering grid environments with their monitor
//! variants.
//!
//! A monitored environment runs two coupled processes per step: the
//! environment itself, and a monitor deciding whether the agent gets to see
//! the environment reward (the proxy is either the true value or nothing —
//! never a distorted scalar). Plain MDPs are the degenerate case with one
//! monitor state, one monitor action, and an always-observed proxy.

pub mod core;
pub mod envs;
pub mod seeds;

pub use crate::core::episode::{run_episode, EpisodeLog, MonEnv};
pub use crate::core::types::{
    AgentStep, EnvObservation, JointAction, JointState, MonState, ProxyReward, Transition,
};
pub use crate::envs::config::EnvConfig;
pub use crate::envs::flora::{FloraKind, NOVEL_TRIPLES};
pub use crate::envs::grid::{
    reward_table, zone_of_col, Cell, EnvAction, FloraCounts, GridWorld, ENV_ACTION_COUNT,
    FULLY_DRY,
};
pub use crate::envs::monitor::{monitor_step, MonitorVariant, ASK_COST, MON_ASK, MON_NOT_ASK};
pub use crate::envs::observe::{
    encode_observation, fill_tensor, pack_cell, tensor_len, to_tensor, CHANNELS,
};
pub use crate::envs::render::render_ascii;
pub use crate::envs::world::{make_env, PlantWorld, ENV_IDS};

/// Errors from environment construction and the step contract.
#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown environment id: {0}")]
    UnknownEnv(String),
    #[error("serialization error: {0}")]
    Serde(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
