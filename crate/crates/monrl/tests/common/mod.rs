#![allow(dead_code)]

//! Shared fixtures: a tiny enumerable always-monitored process and a
//! ground-truth-poisoning wrapper.

use monmdp::{
    AgentStep, EnvError, EnvObservation, JointAction, JointState, MonEnv, ProxyReward, Transition,
};

/// Two states, two environment actions, deterministic dynamics, always
/// observed, zero monitor reward. Action 1 toggles the state, action 0
/// stays. Rewards are fixed per (state, action).
pub struct TwoStateMdp {
    pub rewards: [[f64; 2]; 2],
    state: usize,
    steps: usize,
    limit: usize,
    started: bool,
    truncated: bool,
}

impl TwoStateMdp {
    pub fn new(rewards: [[f64; 2]; 2], limit: usize) -> TwoStateMdp {
        TwoStateMdp { rewards, state: 0, steps: 0, limit, started: false, truncated: false }
    }

    /// Distinct 7x7 observations: state 0 marks type-bit-0, state 1 marks
    /// type-bit-1 on a corner cell.
    pub fn obs_for(state: usize) -> EnvObservation {
        let mut cells = vec![0u8; 49].into_boxed_slice();
        cells[0] = if state == 0 { 0b001 } else { 0b010 };
        EnvObservation { window: 7, cells }
    }

    pub fn next_state(state: usize, action: usize) -> usize {
        if action == 1 {
            1 - state
        } else {
            state
        }
    }
}

impl MonEnv for TwoStateMdp {
    fn env_action_count(&self) -> usize {
        2
    }

    fn mon_action_count(&self) -> usize {
        1
    }

    fn monitor_state_count(&self) -> usize {
        1
    }

    fn step_limit(&self) -> usize {
        self.limit
    }

    fn reset(&mut self, episode_seed: u64) -> JointState {
        self.state = (episode_seed % 2) as usize;
        self.steps = 0;
        self.started = true;
        self.truncated = false;
        JointState { env: Self::obs_for(self.state), mon: 0 }
    }

    fn step(&mut self, action: JointAction) -> Result<Transition, EnvError> {
        if !self.started {
            return Err(EnvError::Usage("step before reset".into()));
        }
        if self.truncated {
            return Err(EnvError::Usage("step on truncated episode".into()));
        }
        if action.env_action >= 2 || action.mon_action >= 1 {
            return Err(EnvError::Usage("action out of range".into()));
        }
        let r = self.rewards[self.state][action.env_action];
        let state = JointState { env: Self::obs_for(self.state), mon: 0 };
        self.state = Self::next_state(self.state, action.env_action);
        self.steps += 1;
        self.truncated = self.steps >= self.limit;
        Ok(Transition {
            state,
            action,
            proxy: ProxyReward::Observed(r),
            mon_reward: 0.0,
            next_state: JointState { env: Self::obs_for(self.state), mon: 0 },
            truncated: self.truncated,
            true_env_reward: r,
        })
    }
}

/// Exact Q-values of a TwoStateMdp by value iteration.
pub fn two_state_q_star(rewards: [[f64; 2]; 2], gamma: f64) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..10_000 {
        let mut next = [[0.0f64; 2]; 2];
        for s in 0..2 {
            for a in 0..2 {
                let s2 = TwoStateMdp::next_state(s, a);
                let vmax = q[s2][0].max(q[s2][1]);
                next[s][a] = rewards[s][a] + gamma * vmax;
            }
        }
        q = next;
    }
    q
}

/// Wraps an environment and corrupts the harness-only ground-truth reward
/// field. Agents that never touch it behave identically.
pub struct PoisonTruth<E> {
    pub inner: E,
}

impl<E: MonEnv> MonEnv for PoisonTruth<E> {
    fn env_action_count(&self) -> usize {
        self.inner.env_action_count()
    }

    fn mon_action_count(&self) -> usize {
        self.inner.mon_action_count()
    }

    fn monitor_state_count(&self) -> usize {
        self.inner.monitor_state_count()
    }

    fn step_limit(&self) -> usize {
        self.inner.step_limit()
    }

    fn drying_events(&self) -> u64 {
        self.inner.drying_events()
    }

    fn reset(&mut self, episode_seed: u64) -> JointState {
        self.inner.reset(episode_seed)
    }

    fn step(&mut self, action: JointAction) -> Result<Transition, EnvError> {
        let mut t = self.inner.step(action)?;
        t.true_env_reward = 1.0e9;
        Ok(t)
    }
}

/// An observed step fixture for buffer-level tests.
pub fn observed_step(value: f64, env_action: usize) -> AgentStep {
    let s = JointState { env: TwoStateMdp::obs_for(0), mon: 0 };
    AgentStep {
        state: s.clone(),
        action: JointAction { env_action, mon_action: 0 },
        proxy: ProxyReward::Observed(value),
        mon_reward: 0.0,
        next_state: JointState { env: TwoStateMdp::obs_for(1), mon: 0 },
        truncated: false,
    }
}

/// An unobservable step fixture.
pub fn hidden_step(mon_reward: f64) -> AgentStep {
    let s = JointState { env: TwoStateMdp::obs_for(0), mon: 0 };
    AgentStep {
        state: s.clone(),
        action: JointAction { env_action: 0, mon_action: 0 },
        proxy: ProxyReward::Unobservable,
        mon_reward,
        next_state: s,
        truncated: false,
    }
}
