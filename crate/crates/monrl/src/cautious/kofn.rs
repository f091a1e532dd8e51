//! k-of-N robust policy optimization: per iteration, sample N reward models,
//! evaluate the current policy under each, and improve the policy against
//! the mean of the k worst. k = N is risk-neutral; small k over large N is
//! risk-averse.

use monmdp::{run_episode, EpisodeLog, MonEnv};
use nanonet::{OptimizerState32, Parameters32};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::model::{joint_from_index, QModel, RewardModel};
use crate::agents::replay::ReplayBuffer;
use crate::cautious::ensemble::Ensemble;
use crate::{tags, RlError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KofnConfig {
    pub k: usize,
    pub n: usize,
    pub iterations: usize,
    /// Greedy rollouts per policy evaluation; all sampled members score the
    /// same rollouts (common random numbers).
    pub rollouts_per_eval: usize,
    /// Fresh exploration episodes collected per iteration.
    pub episodes_per_iteration: usize,
    /// Fitted-Q gradient steps per iteration against the k-worst-mean reward.
    pub updates_per_iteration: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Behavior-policy exploration rate during collection.
    pub explore_eps: f64,
    pub buffer_capacity: usize,
    pub target_sync_every: u64,
    pub gamma: f64,
}

impl Default for KofnConfig {
    fn default() -> Self {
        KofnConfig {
            k: 5,
            n: 10,
            iterations: 50,
            rollouts_per_eval: 4,
            episodes_per_iteration: 10,
            updates_per_iteration: 40,
            batch_size: 256,
            lr: 1e-4,
            explore_eps: 0.1,
            buffer_capacity: 100_000,
            target_sync_every: 50,
            gamma: 0.99,
        }
    }
}

impl KofnConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        if self.k == 0 || self.k > self.n {
            return Err(RlError::Config(format!("need 1 <= k <= N, got {}-of-{}", self.k, self.n)));
        }
        if self.rollouts_per_eval == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(RlError::Config("k-of-N knobs must be positive".into()));
        }
        Ok(())
    }

    /// Robustness presets by name.
    pub fn preset(name: &str) -> Option<(usize, usize)> {
        match name {
            "10-of-10" => Some((10, 10)),
            "5-of-10" => Some((5, 10)),
            "1-of-10" => Some((1, 10)),
            _ => None,
        }
    }

    pub fn with_preset(mut self, k: usize, n: usize) -> Self {
        self.k = k;
        self.n = n;
        self
    }
}

/// A policy produced by the robust optimizer, with its provenance.
#[derive(Debug, Clone)]
pub struct RobustPolicy {
    pub q: Parameters32,
    pub env_actions: usize,
    pub mon_states: usize,
    pub mon_actions: usize,
    pub window: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub k: usize,
    pub n: usize,
    pub iterations: usize,
    pub ensemble_hash: String,
    pub seed: u64,
}

impl RobustPolicy {
    /// Wraps the parameters in a greedy-evaluable model.
    pub fn to_model(&self, lr: f64) -> Result<QModel, RlError> {
        let mut q = QModel::new(
            self.window,
            self.env_actions,
            self.mon_states,
            self.mon_actions,
            lr,
            0,
        )?;
        q.online = self.q.clone();
        q.sync_target();
        Ok(q)
    }
}

/// Per-iteration diagnostics: which members were sampled, their policy
/// values, and the k selected as worst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiag {
    pub iteration: usize,
    pub sampled: Vec<usize>,
    pub values: Vec<f64>,
    pub selected: Vec<usize>,
    pub worst_mean_value: f64,
    pub q_loss_mean: f64,
}

/// Uniform subset of member indices, without replacement.
pub fn sample_models(
    ensemble: &Ensemble,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>, RlError> {
    if n == 0 || n > ensemble.len() {
        return Err(RlError::Config(format!(
            "cannot sample {n} of {} ensemble members",
            ensemble.len()
        )));
    }
    let mut indices: Vec<usize> = (0..ensemble.len()).collect();
    for i in 0..n {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    indices.truncate(n);
    Ok(indices)
}

/// Discounted return of a logged trajectory scored by a reward model:
/// real dynamics, model rewards (plus the always-observed monitor reward).
pub fn score_log_under_member(
    log: &EpisodeLog,
    ensemble: &Ensemble,
    member: usize,
    scratch: &mut RewardModel,
    gamma: f64,
) -> f64 {
    let mut value = 0.0;
    let mut discount = 1.0;
    for t in &log.transitions {
        let pred = ensemble.predict(member, &t.state.env, scratch)[t.action.env_action] as f64;
        value += discount * (pred + t.mon_reward);
        discount *= gamma;
    }
    value
}

/// Mean over greedy rollouts of the model-scored discounted return.
pub fn evaluate_policy_under_model<E: MonEnv + ?Sized>(
    policy: &mut QModel,
    ensemble: &Ensemble,
    member: usize,
    scratch: &mut RewardModel,
    env: &mut E,
    rollouts: usize,
    gamma: f64,
    seed: u64,
) -> Result<f64, RlError> {
    if rollouts == 0 {
        return Err(RlError::Config("rollouts must be >= 1".into()));
    }
    let limit = env.step_limit();
    let mut total = 0.0;
    for r in 0..rollouts {
        let ep_seed = monmdp::seeds::derive(seed, r as u64);
        let log = run_episode(env, |s, _| policy.greedy(s), limit, ep_seed, r as u64)?;
        total += score_log_under_member(&log, ensemble, member, scratch, gamma);
    }
    Ok(total / rollouts as f64)
}

/// Selects the k members with the lowest values; ties resolve toward the
/// lower member index. The result is returned in member-index order so the
/// mean over the selected set is accumulated canonically (k = N therefore
/// reduces exactly to the plain sample mean).
pub fn select_k_worst(sampled: &[usize], values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sampled.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(sampled[a].cmp(&sampled[b]))
    });
    let mut selected: Vec<usize> = order[..k].iter().map(|&i| sampled[i]).collect();
    selected.sort_unstable();
    selected
}

/// Running state of a k-of-N optimization.
pub struct KofnRun {
    pub q: QModel,
    scratch: RewardModel,
    buffer: ReplayBuffer,
    cfg: KofnConfig,
    seed: u64,
    batch_inputs: Vec<f32>,
    batch_concats: Vec<f32>,
    batch_indices: Vec<usize>,
    batch_values: Vec<f32>,
    grads: Parameters32,
}

impl KofnRun {
    /// Warm-starts from an existing Q-model's online parameters with a fresh
    /// optimizer.
    pub fn new(policy0: &QModel, cfg: KofnConfig, seed: u64) -> Result<KofnRun, RlError> {
        cfg.validate()?;
        let mut q = policy0.clone();
        q.opt = OptimizerState32::new(&q.arch, cfg.lr as f32)?;
        q.updates = 0;
        q.sync_target();
        let window = q.arch.input.1;
        let scratch = RewardModel::new(window, q.env_actions, cfg.lr, 0)?;
        let grads = Parameters32::zeros(&q.arch)?;
        Ok(KofnRun {
            q,
            scratch,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            cfg,
            seed,
            batch_inputs: Vec::new(),
            batch_concats: Vec::new(),
            batch_indices: Vec::new(),
            batch_values: Vec::new(),
            grads,
        })
    }

    /// One iteration: sample members, evaluate the current policy under each
    /// on shared rollouts, select the k worst, then run the fitted-Q budget
    /// against the mean of the selected members' rewards.
    pub fn iteration<E: MonEnv + ?Sized>(
        &mut self,
        ensemble: &Ensemble,
        env: &mut E,
        iter: usize,
    ) -> Result<IterationDiag, RlError> {
        let cfg = self.cfg.clone();
        let it = iter as u64;
        let mut sample_rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(
            monmdp::seeds::derive(self.seed, tags::KOFN_SAMPLING),
            it,
        ));
        let sampled = sample_models(ensemble, cfg.n, &mut sample_rng)?;

        // Shared greedy rollouts scored by every sampled member.
        let eval_seed = monmdp::seeds::derive(monmdp::seeds::derive(self.seed, tags::KOFN_EVAL), it);
        let limit = env.step_limit();
        let mut logs = Vec::with_capacity(cfg.rollouts_per_eval);
        for r in 0..cfg.rollouts_per_eval {
            let ep_seed = monmdp::seeds::derive(eval_seed, r as u64);
            logs.push(run_episode(env, |s, _| self.q.greedy(s), limit, ep_seed, r as u64)?);
        }
        let values: Vec<f64> = sampled
            .iter()
            .map(|&m| {
                logs.iter()
                    .map(|log| score_log_under_member(log, ensemble, m, &mut self.scratch, cfg.gamma))
                    .sum::<f64>()
                    / logs.len() as f64
            })
            .collect();
        let selected = select_k_worst(&sampled, &values, cfg.k);
        let worst_mean_value = {
            let sel: f64 = sampled
                .iter()
                .zip(&values)
                .filter(|(m, _)| selected.contains(m))
                .map(|(_, v)| v)
                .sum();
            sel / cfg.k as f64
        };

        // Fresh experience under an exploring version of the current policy.
        let collect_seed =
            monmdp::seeds::derive(monmdp::seeds::derive(self.seed, tags::KOFN_COLLECT), it);
        for e in 0..cfg.episodes_per_iteration {
            let ep_seed = monmdp::seeds::derive(collect_seed, e as u64);
            let joint = self.q.joint_actions();
            let mon_actions = self.q.mon_actions;
            let q = &mut self.q;
            let log = run_episode(
                env,
                |s, rng| {
                    if rng.gen::<f64>() < cfg.explore_eps {
                        joint_from_index(rng.gen_range(0..joint), mon_actions)
                    } else {
                        q.greedy(s)
                    }
                },
                limit,
                ep_seed,
                e as u64,
            )?;
            for t in &log.transitions {
                self.buffer.push(t.redact());
            }
        }

        // Fitted-Q updates against the mean of the selected members.
        let mut update_rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(
            monmdp::seeds::derive(self.seed, tags::TRAIN_SAMPLING),
            it,
        ));
        let tl = monmdp::tensor_len(self.q.arch.input.1);
        let concat_w = self.q.arch.concat_width;
        let mut loss_sum = 0.0;
        let mut updates = 0u64;
        for _ in 0..cfg.updates_per_iteration {
            let bs = cfg.batch_size.min(self.buffer.len());
            if bs == 0 {
                break;
            }
            self.batch_inputs.resize(bs * tl, 0.0);
            self.batch_concats.resize(bs * concat_w, 0.0);
            self.batch_indices.clear();
            self.batch_values.clear();
            for i in 0..bs {
                let step = self.buffer.sample(&mut update_rng).clone();
                let mut r_hat = 0.0f64;
                for &m in &selected {
                    r_hat += ensemble.predict(m, &step.state.env, &mut self.scratch)
                        [step.action.env_action] as f64;
                }
                r_hat = r_hat / selected.len() as f64 + step.mon_reward;
                let y = r_hat + cfg.gamma * self.q.target_max(&step.next_state) as f64;
                monmdp::fill_tensor(&step.state.env, &mut self.batch_inputs[i * tl..(i + 1) * tl]);
                if concat_w > 0 {
                    let row = &mut self.batch_concats[i * concat_w..(i + 1) * concat_w];
                    row.iter_mut().for_each(|x| *x = 0.0);
                    row[(step.state.mon as usize).min(concat_w - 1)] = 1.0;
                }
                self.batch_indices
                    .push(crate::agents::model::joint_index(step.action, self.q.mon_actions));
                self.batch_values.push(y as f32);
            }
            let concats =
                if concat_w > 0 { Some(&self.batch_concats[..bs * concat_w]) } else { None };
            let (loss, _norm) = self.q.fit_step(
                &self.batch_inputs[..bs * tl],
                concats,
                bs,
                &self.batch_indices,
                &self.batch_values,
                &mut self.grads,
                cfg.target_sync_every,
            )?;
            loss_sum += loss as f64;
            updates += 1;
        }

        Ok(IterationDiag {
            iteration: iter,
            sampled,
            values,
            selected,
            worst_mean_value,
            q_loss_mean: if updates > 0 { loss_sum / updates as f64 } else { 0.0 },
        })
    }
}

/// Runs the full k-of-N loop from a warm-start policy.
pub fn run_k_of_n<E: MonEnv + ?Sized>(
    policy0: &QModel,
    ensemble: &Ensemble,
    cfg: &KofnConfig,
    env: &mut E,
    seed: u64,
) -> Result<(RobustPolicy, Vec<IterationDiag>), RlError> {
    let mut run = KofnRun::new(policy0, cfg.clone(), seed)?;
    let mut diags = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        diags.push(run.iteration(ensemble, env, it)?);
    }
    Ok((
        RobustPolicy {
            q: run.q.online.clone(),
            env_actions: run.q.env_actions,
            mon_states: run.q.mon_states,
            mon_actions: run.q.mon_actions,
            window: run.q.arch.input.1,
            provenance: Provenance {
                k: cfg.k,
                n: cfg.n,
                iterations: cfg.iterations,
                ensemble_hash: format!("{:016x}", ensemble.dataset_hash),
                seed,
            },
        },
        diags,
    ))
}
