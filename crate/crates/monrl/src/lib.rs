//! Reward-model-augmented Q-learning agents over monitored environments,
//! epistemic-uncertainty ensembles with k-of-N robust policy optimization,
//! and the experiment harness that turns runs into tables and curves.

pub mod agents;
pub mod cautious;
pub mod harness;

pub use agents::checkpoint::{load_checkpoint, save_checkpoint};
pub use agents::dqn::{
    effective_reward, evaluate_greedy_rows, train, Agent, AgentVariant, RoundDiagnostics, RunMeta,
    TrainOptions, TrainState,
};
pub use agents::model::{argmax_lowest, joint_from_index, joint_index, QModel, RewardModel};
pub use agents::replay::ReplayBuffer;
pub use agents::schedule::TrainingSchedule;

/// Seed-stream tags used to derive independent generators from a run seed.
pub mod tags {
    pub const Q_INIT: u64 = 0x51;
    pub const RM_INIT: u64 = 0x52;
    pub const TRAIN_SAMPLING: u64 = 0x53;
    pub const EPISODES: u64 = 0x54;
    pub const EVAL: u64 = 0x55;
    pub const DATASET: u64 = 0x56;
    pub const ENSEMBLE: u64 = 0x57;
    pub const KOFN_SAMPLING: u64 = 0x58;
    pub const KOFN_EVAL: u64 = 0x59;
    pub const KOFN_COLLECT: u64 = 0x5a;
    pub const BOOTSTRAP: u64 = 0x5b;
    pub const REPORT: u64 = 0x5c;
}

/// Errors across agents, cautious optimization, and the harness.
#[derive(Debug, thiserror::Error)]
pub enum RlError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Env(#[from] monmdp::EnvError),
    #[error(transparent)]
    Net(#[from] nanonet::NetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}
