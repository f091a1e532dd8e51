//! The monitored-MDP interaction types: joint states and actions, proxy
//! rewards, and the transition record.

use serde::{Deserialize, Serialize};

/// Index into an environment's finite monitor-state set. Environments with a
/// single monitor state (plain MDPs) always report 0.
pub type MonState = u8;

/// A packed environment observation: a square window of per-cell codes.
///
/// The byte layout is owned by the environment that produced it; this module
/// only moves it around. See the grid environments for the cell encoding and
/// the tensor expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvObservation {
    pub window: u8,
    pub cells: Box<[u8]>,
}

/// The paired environment/monitor state the agent perceives each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub env: EnvObservation,
    pub mon: MonState,
}

/// The paired environment/monitor action the agent emits each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointAction {
    pub env_action: usize,
    pub mon_action: usize,
}

/// What the agent sees in place of the environment reward: either the true
/// value, exactly, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProxyReward {
    Observed(f64),
    Unobservable,
}

impl ProxyReward {
    pub fn is_observed(&self) -> bool {
        matches!(self, ProxyReward::Observed(_))
    }

    pub fn observed(&self) -> Option<f64> {
        match self {
            ProxyReward::Observed(r) => Some(*r),
            ProxyReward::Unobservable => None,
        }
    }
}

/// One full step record. `true_env_reward` is harness-side ground truth for
/// metrics; agent code receives [`AgentStep`] views that exclude it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: JointState,
    pub action: JointAction,
    pub proxy: ProxyReward,
    pub mon_reward: f64,
    pub next_state: JointState,
    pub truncated: bool,
    pub true_env_reward: f64,
}

impl Transition {
    /// The agent-visible view: everything except the ground-truth reward.
    pub fn redact(&self) -> AgentStep {
        AgentStep {
            state: self.state.clone(),
            action: self.action,
            proxy: self.proxy,
            mon_reward: self.mon_reward,
            next_state: self.next_state.clone(),
            truncated: self.truncated,
        }
    }
}

/// The information an agent is allowed to learn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub state: JointState,
    pub action: JointAction,
    pub proxy: ProxyReward,
    pub mon_reward: f64,
    pub next_state: JointState,
    pub truncated: bool,
}
