//! The environment contract and the episode loop.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seeds::{self, stream};
use crate::{EnvError, JointAction, JointState, Transition};

/// A monitored environment: an environment process plus a monitor process
/// that decides when the reward is observable.
///
/// Instances are single-owner; one episode loop drives one environment.
/// Independent runs each hold their own instance.
pub trait MonEnv {
    fn env_action_count(&self) -> usize;
    fn mon_action_count(&self) -> usize;
    fn monitor_state_count(&self) -> usize;
    fn step_limit(&self) -> usize;

    /// Starts a new episode: re-randomizes the internal layout from the
    /// episode seed, zeroes per-episode counters, and returns the initial
    /// joint state.
    fn reset(&mut self, episode_seed: u64) -> JointState;

    /// Advances one step. Fails if called before `reset` or after the
    /// episode truncated.
    fn step(&mut self, action: JointAction) -> Result<Transition, EnvError>;

    /// Diagnostic: drying-process events since the last reset. Environments
    /// without a drying process report 0.
    fn drying_events(&self) -> u64 {
        0
    }
}

/// A full episode with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub episode_index: u64,
    pub transitions: Vec<Transition>,
}

impl EpisodeLog {
    /// Sum over steps of the true environment reward plus monitor reward —
    /// the quantity the agent is actually judged on.
    pub fn true_return(&self) -> f64 {
        self.transitions.iter().map(|t| t.true_env_reward + t.mon_reward).sum()
    }

    /// One transition per line as JSON.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<(), EnvError> {
        for t in &self.transitions {
            serde_json::to_writer(&mut *w, t).map_err(|e| EnvError::Serde(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads transitions back from a JSONL stream.
    pub fn read_jsonl<R: BufRead>(
        r: R,
        seed: u64,
        episode_index: u64,
    ) -> Result<Self, EnvError> {
        let mut transitions = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            transitions
                .push(serde_json::from_str(&line).map_err(|e| EnvError::Serde(e.to_string()))?);
        }
        Ok(EpisodeLog { seed, episode_index, transitions })
    }
}

/// Runs one episode under `policy`, which receives the current joint state
/// and the episode's exploration stream. The episode seed deterministically
/// fixes layout, drying, and exploration.
pub fn run_episode<E, P>(
    env: &mut E,
    mut policy: P,
    max_steps: usize,
    episode_seed: u64,
    episode_index: u64,
) -> Result<EpisodeLog, EnvError>
where
    E: MonEnv + ?Sized,
    P: FnMut(&JointState, &mut ChaCha8Rng) -> JointAction,
{
    if max_steps == 0 {
        return Err(EnvError::Usage("run_episode requires max_steps >= 1".into()));
    }
    let mut explore = ChaCha8Rng::seed_from_u64(seeds::derive(episode_seed, stream::EXPLORE));
    let mut state = env.reset(episode_seed);
    let mut transitions = Vec::with_capacity(max_steps.min(env.step_limit()));
    for _ in 0..max_steps {
        let action = policy(&state, &mut explore);
        let t = env.step(action)?;
        state = t.next_state.clone();
        let truncated = t.truncated;
        transitions.push(t);
        if truncated {
            break;
        }
    }
    Ok(EpisodeLog { seed: episode_seed, episode_index, transitions })
}
