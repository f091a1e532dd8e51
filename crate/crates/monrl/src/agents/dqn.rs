//! Joint-state DQN over monitored environments: the reward-model agent and
//! the two MDP-reduction baselines, with replay, a target network, and
//! epsilon-greedy exploration.

use monmdp::{
    fill_tensor, run_episode, tensor_len, AgentStep, JointState, MonEnv, MonitorVariant,
};
use nanonet::Parameters32;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::model::{joint_from_index, QModel, RewardModel};
use crate::agents::replay::ReplayBuffer;
use crate::agents::schedule::TrainingSchedule;
use crate::harness::metrics::{episode_row, summarize_eval, EpisodeRow, RunRecord};
use crate::{tags, RlError};

/// How unobservable rewards are handled in Q-updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentVariant {
    /// Q-targets always use the learned reward model's prediction; the
    /// observed values reach learning only through the reward-model loss.
    RewardModel,
    /// Unobservable rewards are replaced with zero.
    BotZero,
    /// Samples with unobservable rewards are excluded from Q-updates.
    Ignore,
}

impl AgentVariant {
    pub fn id(self) -> &'static str {
        match self {
            AgentVariant::RewardModel => "reward-model",
            AgentVariant::BotZero => "bot-zero",
            AgentVariant::Ignore => "ignore",
        }
    }

    pub fn from_id(id: &str) -> Option<AgentVariant> {
        match id {
            "reward-model" => Some(AgentVariant::RewardModel),
            "bot-zero" => Some(AgentVariant::BotZero),
            "ignore" => Some(AgentVariant::Ignore),
            _ => None,
        }
    }
}

/// The reward an update would regress toward for one stored step, or `None`
/// when the variant excludes the sample.
pub fn effective_reward(
    variant: AgentVariant,
    step: &AgentStep,
    reward_model: Option<&mut RewardModel>,
) -> Option<f64> {
    match variant {
        AgentVariant::BotZero => Some(step.proxy.observed().unwrap_or(0.0) + step.mon_reward),
        AgentVariant::Ignore => step.proxy.observed().map(|v| v + step.mon_reward),
        AgentVariant::RewardModel => {
            let rm = reward_model.expect("reward-model variant carries a model");
            let pred = rm.predict(&step.state.env)[step.action.env_action] as f64;
            Some(pred + step.mon_reward)
        }
    }
}

/// Diagnostics of one training round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundDiagnostics {
    pub q_updates: u64,
    pub q_loss_mean: f64,
    pub q_grad_norm_mean: f64,
    pub reward_updates: u64,
    pub reward_loss_mean: f64,
    /// Samples dropped from Q-batches (unobservable rewards under Ignore).
    pub skipped_samples: u64,
    /// True when the buffer had not reached the warmup threshold.
    pub warming_up: bool,
}

pub struct Agent {
    pub variant: AgentVariant,
    pub schedule: TrainingSchedule,
    pub q: QModel,
    pub reward_model: Option<RewardModel>,
    pub buffer: ReplayBuffer,
    pub observed: ReplayBuffer,
    window: usize,
    batch_inputs: Vec<f32>,
    batch_concats: Vec<f32>,
    batch_indices: Vec<usize>,
    batch_values: Vec<f32>,
    q_grads: Parameters32,
    rm_grads: Option<Parameters32>,
}

impl Agent {
    pub fn new(
        variant: AgentVariant,
        window: usize,
        env_actions: usize,
        mon_states: usize,
        mon_actions: usize,
        schedule: TrainingSchedule,
        seed: u64,
    ) -> Result<Agent, RlError> {
        schedule.validate()?;
        let q = QModel::new(
            window,
            env_actions,
            mon_states,
            mon_actions,
            schedule.lr_q,
            monmdp::seeds::derive(seed, tags::Q_INIT),
        )?;
        let reward_model = if variant == AgentVariant::RewardModel {
            Some(RewardModel::new(
                window,
                env_actions,
                schedule.lr_reward,
                monmdp::seeds::derive(seed, tags::RM_INIT),
            )?)
        } else {
            None
        };
        let q_grads = Parameters32::zeros(&q.arch)?;
        let rm_grads = match &reward_model {
            Some(rm) => Some(Parameters32::zeros(&rm.arch)?),
            None => None,
        };
        Ok(Agent {
            variant,
            buffer: ReplayBuffer::new(schedule.buffer_capacity),
            observed: ReplayBuffer::new(schedule.buffer_capacity),
            schedule,
            q,
            reward_model,
            window,
            batch_inputs: Vec::new(),
            batch_concats: Vec::new(),
            batch_indices: Vec::new(),
            batch_values: Vec::new(),
            q_grads,
            rm_grads,
        })
    }

    /// Epsilon-greedy action selection: explore uniformly over the joint
    /// action set, otherwise take the online argmax (ties to lowest index).
    pub fn select_action(
        &mut self,
        state: &JointState,
        episode_index: u64,
        rng: &mut ChaCha8Rng,
    ) -> monmdp::JointAction {
        let eps = self.schedule.epsilon(episode_index);
        if rng.gen::<f64>() < eps {
            joint_from_index(rng.gen_range(0..self.q.joint_actions()), self.q.mon_actions)
        } else {
            self.q.greedy(state)
        }
    }

    /// Stores an agent-visible step in the replay buffers.
    pub fn store(&mut self, step: AgentStep) {
        if step.proxy.is_observed() {
            self.observed.push(step.clone());
        }
        self.buffer.push(step);
    }

    /// One reward-model gradient step on an observed-only batch.
    fn reward_model_step(&mut self, rng: &mut ChaCha8Rng) -> Result<f32, RlError> {
        let bs = self.schedule.batch_size;
        let tl = tensor_len(self.window);
        self.batch_inputs.resize(bs * tl, 0.0);
        self.batch_indices.clear();
        self.batch_values.clear();
        for i in 0..bs {
            let step = self.observed.sample(rng);
            let value = step
                .proxy
                .observed()
                .ok_or_else(|| RlError::Contract("unobservable sample in reward-model batch".into()))?;
            fill_tensor(&step.state.env, &mut self.batch_inputs[i * tl..(i + 1) * tl]);
            self.batch_indices.push(step.action.env_action);
            self.batch_values.push(value as f32);
        }
        let rm = self.reward_model.as_mut().expect("caller checked the variant");
        let grads = self.rm_grads.as_mut().expect("sized with the model");
        rm.fit_step(&self.batch_inputs[..bs * tl], bs, &self.batch_indices, &self.batch_values, grads)
    }

    /// One Q gradient step. Returns (loss, grad_norm, kept, skipped); a batch
    /// with every sample excluded performs no update.
    fn q_step(&mut self, rng: &mut ChaCha8Rng) -> Result<(f32, f64, usize, usize), RlError> {
        let bs = self.schedule.batch_size;
        let tl = tensor_len(self.window);
        let concat_w = self.q.arch.concat_width;
        self.batch_inputs.resize(bs * tl, 0.0);
        self.batch_concats.resize(bs * concat_w, 0.0);
        self.batch_indices.clear();
        self.batch_values.clear();
        let gamma = self.schedule.gamma;
        let mut kept = 0usize;
        let mut skipped = 0usize;
        for _ in 0..bs {
            let step = self.buffer.sample(rng).clone();
            let eff = effective_reward(self.variant, &step, self.reward_model.as_mut());
            let Some(eff) = eff else {
                skipped += 1;
                continue;
            };
            // Continuing task: truncation bootstraps like any other step.
            let target = eff + gamma * self.q.target_max(&step.next_state) as f64;
            fill_tensor(&step.state.env, &mut self.batch_inputs[kept * tl..(kept + 1) * tl]);
            if concat_w > 0 {
                let row = &mut self.batch_concats[kept * concat_w..(kept + 1) * concat_w];
                row.iter_mut().for_each(|x| *x = 0.0);
                row[(step.state.mon as usize).min(concat_w - 1)] = 1.0;
            }
            self.batch_indices
                .push(crate::agents::model::joint_index(step.action, self.q.mon_actions));
            self.batch_values.push(target as f32);
            kept += 1;
        }
        if kept == 0 {
            return Ok((0.0, 0.0, 0, skipped));
        }
        let concats = if concat_w > 0 { Some(&self.batch_concats[..kept * concat_w]) } else { None };
        let (loss, norm) = self.q.fit_step(
            &self.batch_inputs[..kept * tl],
            concats,
            kept,
            &self.batch_indices,
            &self.batch_values,
            &mut self.q_grads,
            self.schedule.target_sync_every,
        )?;
        Ok((loss, norm, kept, skipped))
    }

    /// A training round: one gradient step per `steps_per_update` environment
    /// steps collected since the last round, run in a burst. The reward-model
    /// variant interleaves its own observed-only reward steps. No-op with a
    /// diagnostic until the buffer passes the warmup threshold.
    pub fn q_update_round(
        &mut self,
        steps_collected: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<RoundDiagnostics, RlError> {
        let mut diag = RoundDiagnostics::default();
        if self.buffer.len() < self.schedule.start_after {
            diag.warming_up = true;
            return Ok(diag);
        }
        let n_updates = steps_collected / self.schedule.steps_per_update;
        for _ in 0..n_updates {
            if self.variant == AgentVariant::RewardModel && !self.observed.is_empty() {
                let loss = self.reward_model_step(rng)?;
                diag.reward_updates += 1;
                diag.reward_loss_mean += loss as f64;
            }
            let (loss, norm, kept, skipped) = self.q_step(rng)?;
            diag.skipped_samples += skipped as u64;
            if kept > 0 {
                diag.q_updates += 1;
                diag.q_loss_mean += loss as f64;
                diag.q_grad_norm_mean += norm;
            }
        }
        if diag.q_updates > 0 {
            diag.q_loss_mean /= diag.q_updates as f64;
            diag.q_grad_norm_mean /= diag.q_updates as f64;
        }
        if diag.reward_updates > 0 {
            diag.reward_loss_mean /= diag.reward_updates as f64;
        }
        Ok(diag)
    }
}

/// Identity of a run; the monitor variant drives metric attribution.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub env_id: String,
    pub variant: MonitorVariant,
    pub seed: u64,
}

/// Cross-episode progress, persisted in checkpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub episode: u64,
    pub steps_done: u64,
    pub steps_since_round: u64,
}

pub struct TrainOptions {
    pub eval_episodes: u64,
    /// Write a checkpoint every this many episodes (0 = only at the end,
    /// and only when a path is set).
    pub checkpoint_every: u64,
    pub checkpoint_path: Option<std::path::PathBuf>,
    pub resume: Option<TrainState>,
    /// Print a progress line to stderr every this many episodes (0 = quiet).
    pub progress_every: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            eval_episodes: 100,
            checkpoint_every: 0,
            checkpoint_path: None,
            resume: None,
            progress_every: 0,
        }
    }
}

/// The full interaction loop: act, store, and run a training round every
/// `round_episodes` episodes; finishes with a greedy evaluation.
pub fn train<E: MonEnv + ?Sized>(
    agent: &mut Agent,
    env: &mut E,
    meta: &RunMeta,
    total_steps: u64,
    opts: &TrainOptions,
) -> Result<RunRecord, RlError> {
    let mut state = opts.resume.unwrap_or_default();
    let mut rows: Vec<EpisodeRow> = Vec::new();
    // Each training round gets its own derived sampling stream, so resuming
    // from a checkpoint rejoins the exact same streams.
    let sampling_seed = monmdp::seeds::derive(meta.seed, tags::TRAIN_SAMPLING);
    let episodes_seed = monmdp::seeds::derive(meta.seed, tags::EPISODES);
    let step_limit = env.step_limit();

    while state.steps_done < total_steps {
        let episode = state.episode;
        let ep_seed = monmdp::seeds::derive(episodes_seed, episode);
        let eps = agent.schedule.epsilon(episode);
        let log = run_episode(
            env,
            |s, rng| agent.select_action(s, episode, rng),
            step_limit,
            ep_seed,
            episode,
        )?;
        for t in &log.transitions {
            agent.store(t.redact());
        }
        let mut row =
            episode_row(&log, meta.variant, episode, eps, env.drying_events() as u32);
        state.steps_done += u64::from(row.steps);
        state.steps_since_round += u64::from(row.steps);
        state.episode += 1;

        if state.episode % agent.schedule.round_episodes == 0 {
            let round_index = state.episode / agent.schedule.round_episodes;
            let mut round_rng =
                ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(sampling_seed, round_index));
            let diag = agent.q_update_round(state.steps_since_round as usize, &mut round_rng)?;
            state.steps_since_round = 0;
            if !diag.warming_up {
                row.q_loss = Some(diag.q_loss_mean);
                row.reward_loss =
                    (diag.reward_updates > 0).then_some(diag.reward_loss_mean);
                row.q_updates = Some(diag.q_updates);
            }
        }
        if opts.progress_every > 0 && state.episode % opts.progress_every == 0 {
            let recent = rows.iter().rev().take(100);
            let (n, sum, asks) = recent.fold((0u32, 0.0f64, 0u64), |(n, s, a), r| {
                (n + 1, s + r.return_true, a + r.asks as u64)
            });
            eprintln!(
                "episode {:>7} steps {:>9} eps {:.3} return[100] {:>7.3} asks[100] {:>5.2}/ep q_loss {:?}",
                state.episode,
                state.steps_done,
                eps,
                sum / n.max(1) as f64,
                asks as f64 / n.max(1) as f64,
                row.q_loss.map(|l| (l * 1e4).round() / 1e4),
            );
        }
        rows.push(row);

        if opts.checkpoint_every > 0 && state.episode % opts.checkpoint_every == 0 {
            if let Some(path) = &opts.checkpoint_path {
                crate::agents::checkpoint::save_checkpoint(path, agent, &state)?;
            }
        }
    }

    if let Some(path) = &opts.checkpoint_path {
        crate::agents::checkpoint::save_checkpoint(path, agent, &state)?;
    }

    let eval_rows = evaluate_greedy_rows(
        &mut agent.q,
        env,
        meta.variant,
        opts.eval_episodes,
        monmdp::seeds::derive(meta.seed, tags::EVAL),
    )?;
    Ok(RunRecord {
        env_id: meta.env_id.clone(),
        agent: agent.variant.id().to_string(),
        seed: meta.seed,
        total_steps: state.steps_done,
        episodes: state.episode,
        rows,
        eval: summarize_eval(&eval_rows),
    })
}

/// Greedy (exploration-off) evaluation episodes for a Q-model.
pub fn evaluate_greedy_rows<E: MonEnv + ?Sized>(
    q: &mut QModel,
    env: &mut E,
    variant: MonitorVariant,
    episodes: u64,
    seed_base: u64,
) -> Result<Vec<EpisodeRow>, RlError> {
    let step_limit = env.step_limit();
    let mut rows = Vec::with_capacity(episodes as usize);
    for e in 0..episodes {
        let ep_seed = monmdp::seeds::derive(seed_base, e);
        let log = run_episode(env, |s, _| q.greedy(s), step_limit, ep_seed, e)?;
        rows.push(episode_row(&log, variant, e, 0.0, env.drying_events() as u32));
    }
    Ok(rows)
}
