//! The two function approximators: the joint-state Q-model with a monitor
//! one-hot concatenated after the conv stack, and the environment reward
//! model over (environment state, environment action).

use monmdp::{fill_tensor, tensor_len, EnvObservation, JointAction, JointState};
use nanonet::{
    adam_step, forward_into, gradients, init_params, Architecture, Batch, BatchTargets,
    OptimizerState32, Parameters32, Workspace32,
};

use crate::RlError;

/// Joint-action index: environment-major, monitor-minor.
pub fn joint_index(action: JointAction, mon_actions: usize) -> usize {
    action.env_action * mon_actions + action.mon_action
}

pub fn joint_from_index(idx: usize, mon_actions: usize) -> JointAction {
    JointAction { env_action: idx / mon_actions, mon_action: idx % mon_actions }
}

/// Greedy argmax with ties broken by the lowest index.
pub fn argmax_lowest(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Q-network over the joint state. Environments with more than one monitor
/// state get a one-hot of it concatenated between the conv stack and the
/// dense stage; single-monitor-state environments get no concat input.
#[derive(Debug, Clone)]
pub struct QModel {
    pub arch: Architecture,
    pub online: Parameters32,
    pub target: Parameters32,
    pub opt: OptimizerState32,
    pub env_actions: usize,
    pub mon_states: usize,
    pub mon_actions: usize,
    /// Gradient updates applied so far (drives target syncs).
    pub updates: u64,
    ws: Workspace32,
    obs_buf: Vec<f32>,
    onehot: Vec<f32>,
}

fn concat_width_for(mon_states: usize) -> usize {
    if mon_states > 1 {
        mon_states
    } else {
        0
    }
}

impl QModel {
    pub fn new(
        window: usize,
        env_actions: usize,
        mon_states: usize,
        mon_actions: usize,
        lr: f64,
        seed: u64,
    ) -> Result<QModel, RlError> {
        let concat = concat_width_for(mon_states);
        let arch = Architecture::default_stack(
            (monmdp::CHANNELS, window, window),
            concat,
            env_actions * mon_actions,
        );
        let online = init_params::<f32>(&arch, seed)?;
        let target = online.clone();
        let opt = OptimizerState32::new(&arch, lr as f32)?;
        let ws = Workspace32::new(&arch)?;
        Ok(QModel {
            arch,
            online,
            target,
            opt,
            env_actions,
            mon_states,
            mon_actions,
            updates: 0,
            ws,
            obs_buf: vec![0.0; tensor_len(window)],
            onehot: vec![0.0; concat],
        })
    }

    pub fn joint_actions(&self) -> usize {
        self.env_actions * self.mon_actions
    }

    fn load_state(&mut self, state: &JointState) {
        fill_tensor(&state.env, &mut self.obs_buf);
        if !self.onehot.is_empty() {
            self.onehot.iter_mut().for_each(|x| *x = 0.0);
            self.onehot[(state.mon as usize).min(self.mon_states - 1)] = 1.0;
        }
    }

    /// Online Q-values for every joint action.
    pub fn q_values(&mut self, state: &JointState) -> &[f32] {
        self.load_state(state);
        let concat = if self.onehot.is_empty() { None } else { Some(self.onehot.as_slice()) };
        forward_into(&self.arch, &self.online, &self.obs_buf, concat, &mut self.ws)
    }

    /// Greedy joint action under the online network.
    pub fn greedy(&mut self, state: &JointState) -> JointAction {
        let mon_actions = self.mon_actions;
        let idx = argmax_lowest(self.q_values(state));
        joint_from_index(idx, mon_actions)
    }

    /// Max over joint actions of the target network at `state`.
    pub fn target_max(&mut self, state: &JointState) -> f32 {
        self.load_state(state);
        let concat = if self.onehot.is_empty() { None } else { Some(self.onehot.as_slice()) };
        let out = forward_into(&self.arch, &self.target, &self.obs_buf, concat, &mut self.ws);
        out[argmax_lowest(out)]
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    /// One masked-MSE Adam step on the online network at the taken joint
    /// actions; refreshes the target every `sync_every` updates. Returns
    /// (loss, gradient L2 norm).
    #[allow(clippy::too_many_arguments)]
    pub fn fit_step(
        &mut self,
        inputs: &[f32],
        concats: Option<&[f32]>,
        len: usize,
        indices: &[usize],
        values: &[f32],
        grads: &mut Parameters32,
        sync_every: u64,
    ) -> Result<(f32, f64), RlError> {
        let batch = Batch { inputs, concats, len };
        let targets = BatchTargets::Masked { indices, values };
        let loss = gradients(&self.arch, &self.online, &batch, &targets, grads, &mut self.ws)?;
        let norm = grads
            .tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|&g| (g as f64) * (g as f64))
            .sum::<f64>()
            .sqrt();
        adam_step(&mut self.online, grads, &mut self.opt)?;
        self.updates += 1;
        if sync_every > 0 && self.updates % sync_every == 0 {
            self.sync_target();
        }
        Ok((loss, norm))
    }
}

/// Reward model: predicts the environment reward for every environment
/// action at an environment state. No monitor input.
#[derive(Debug, Clone)]
pub struct RewardModel {
    pub arch: Architecture,
    pub params: Parameters32,
    pub opt: OptimizerState32,
    ws: Workspace32,
    obs_buf: Vec<f32>,
}

impl RewardModel {
    pub fn new(window: usize, env_actions: usize, lr: f64, seed: u64) -> Result<RewardModel, RlError> {
        let arch =
            Architecture::default_stack((monmdp::CHANNELS, window, window), 0, env_actions);
        let params = init_params::<f32>(&arch, seed)?;
        let opt = OptimizerState32::new(&arch, lr as f32)?;
        let ws = Workspace32::new(&arch)?;
        Ok(RewardModel { arch, params, opt, ws, obs_buf: vec![0.0; tensor_len(window)] })
    }

    /// Predicted rewards for all environment actions.
    pub fn predict(&mut self, obs: &EnvObservation) -> &[f32] {
        fill_tensor(obs, &mut self.obs_buf);
        forward_into(&self.arch, &self.params, &self.obs_buf, None, &mut self.ws)
    }

    /// Predicts with explicit parameters (ensemble members share one
    /// scratch-carrying model).
    pub fn predict_with<'a>(
        &'a mut self,
        params: &Parameters32,
        obs: &EnvObservation,
    ) -> &'a [f32] {
        fill_tensor(obs, &mut self.obs_buf);
        forward_into(&self.arch, params, &self.obs_buf, None, &mut self.ws)
    }

    /// One masked-MSE Adam step toward `values` at the taken env actions.
    pub fn fit_step(
        &mut self,
        inputs: &[f32],
        len: usize,
        indices: &[usize],
        values: &[f32],
        grads: &mut Parameters32,
    ) -> Result<f32, RlError> {
        let batch = Batch { inputs, concats: None, len };
        let targets = BatchTargets::Masked { indices, values };
        let loss = gradients(&self.arch, &self.params, &batch, &targets, grads, &mut self.ws)?;
        adam_step(&mut self.params, grads, &mut self.opt)?;
        Ok(loss)
    }
}
