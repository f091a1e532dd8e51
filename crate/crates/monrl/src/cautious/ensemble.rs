//! Ensembles of independently seeded reward models trained on the same
//! observed-sample dataset; their disagreement is the epistemic-uncertainty
//! signal the robust optimizer consumes.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use monmdp::{fill_tensor, tensor_len, AgentStep, EnvObservation};
use nanonet::{
    adam_step, gradients, init_params, load_params_expecting, save_params, Architecture, Batch,
    BatchTargets, OptimizerState32, Parameters32, Workspace32,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::model::RewardModel;
use crate::{tags, RlError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub members: usize,
    /// Fixed training budget: passes over the dataset per member.
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Deterministic subsample cap on the dataset (0 = use everything).
    pub max_dataset: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { members: 500, epochs: 4, batch_size: 512, lr: 1e-4, max_dataset: 60_000 }
    }
}

/// Trained ensemble: members share the architecture and the dataset and
/// differ only by their initialization/shuffling seeds.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub arch: Architecture,
    pub window: usize,
    pub members: Vec<Parameters32>,
    pub member_seeds: Vec<u64>,
    pub dataset_hash: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Per-member predicted rewards for all environment actions.
    pub fn predict<'a>(
        &self,
        member: usize,
        obs: &EnvObservation,
        scratch: &'a mut RewardModel,
    ) -> &'a [f32] {
        scratch.predict_with(&self.members[member], obs)
    }
}

/// FNV-1a over the observed dataset's identifying bytes.
pub fn dataset_hash(steps: &[AgentStep]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for s in steps {
        for &b in s.state.env.cells.iter() {
            eat(b);
        }
        eat(s.state.mon);
        eat(s.action.env_action as u8);
        eat(s.action.mon_action as u8);
        if let Some(v) = s.proxy.observed() {
            for b in v.to_le_bytes() {
                eat(b);
            }
        }
    }
    for b in (steps.len() as u64).to_le_bytes() {
        eat(b);
    }
    h
}

/// Uniform subsample without replacement, order-preserving; identity when
/// `max` is 0 or not smaller than the dataset.
pub fn subsample_dataset(steps: &[AgentStep], max: usize, seed: u64) -> Vec<AgentStep> {
    if max == 0 || steps.len() <= max {
        return steps.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..steps.len()).collect();
    for i in 0..max {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    let mut keep: Vec<usize> = indices[..max].to_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| steps[i].clone()).collect()
}

fn check_observed(dataset: &[AgentStep]) -> Result<(), RlError> {
    if dataset.is_empty() {
        return Err(RlError::Config("ensemble dataset is empty".into()));
    }
    if dataset.iter().any(|s| !s.proxy.is_observed()) {
        return Err(RlError::Contract(
            "ensemble dataset contains unobservable-reward samples".into(),
        ));
    }
    Ok(())
}

/// Trains `cfg.members` reward models on the same observed dataset, each
/// from its own derived seed (initialization and shuffling).
pub fn train_ensemble(
    dataset: &[AgentStep],
    window: usize,
    env_actions: usize,
    cfg: &EnsembleConfig,
    seed: u64,
) -> Result<Ensemble, RlError> {
    check_observed(dataset)?;
    if cfg.members == 0 {
        return Err(RlError::Config("ensemble needs at least one member".into()));
    }
    let data =
        subsample_dataset(dataset, cfg.max_dataset, monmdp::seeds::derive(seed, tags::DATASET));
    let hash = dataset_hash(&data);
    let arch =
        Architecture::default_stack((monmdp::CHANNELS, window, window), 0, env_actions);
    let tl = tensor_len(window);

    // Expand the dataset once; members re-read it in shuffled order.
    let mut tensors = vec![0.0f32; data.len() * tl];
    let mut actions = Vec::with_capacity(data.len());
    let mut values = Vec::with_capacity(data.len());
    for (i, s) in data.iter().enumerate() {
        fill_tensor(&s.state.env, &mut tensors[i * tl..(i + 1) * tl]);
        actions.push(s.action.env_action);
        values.push(s.proxy.observed().expect("checked observed") as f32);
    }

    let mut members = Vec::with_capacity(cfg.members);
    let mut member_seeds = Vec::with_capacity(cfg.members);
    let mut ws = Workspace32::new(&arch)?;
    let mut grads = Parameters32::zeros(&arch)?;
    let mut batch_inputs = vec![0.0f32; cfg.batch_size * tl];
    let mut batch_actions = vec![0usize; cfg.batch_size];
    let mut batch_values = vec![0.0f32; cfg.batch_size];

    for m in 0..cfg.members {
        let mseed = monmdp::seeds::derive(monmdp::seeds::derive(seed, tags::ENSEMBLE), m as u64);
        let mut params = init_params::<f32>(&arch, mseed)?;
        let mut opt = OptimizerState32::new(&arch, cfg.lr as f32)?;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(mseed, 0x0e));
        for _epoch in 0..cfg.epochs {
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            for chunk in order.chunks(cfg.batch_size) {
                let b = chunk.len();
                for (bi, &di) in chunk.iter().enumerate() {
                    batch_inputs[bi * tl..(bi + 1) * tl]
                        .copy_from_slice(&tensors[di * tl..(di + 1) * tl]);
                    batch_actions[bi] = actions[di];
                    batch_values[bi] = values[di];
                }
                let batch = Batch { inputs: &batch_inputs[..b * tl], concats: None, len: b };
                let targets = BatchTargets::Masked {
                    indices: &batch_actions[..b],
                    values: &batch_values[..b],
                };
                gradients(&arch, &params, &batch, &targets, &mut grads, &mut ws)?;
                adam_step(&mut params, &grads, &mut opt)?;
            }
        }
        members.push(params);
        member_seeds.push(mseed);
    }
    Ok(Ensemble { arch, window, members, member_seeds, dataset_hash: hash })
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    members: usize,
    window: usize,
    env_actions: usize,
    member_seeds: Vec<u64>,
    dataset_hash: String,
}

/// Writes `ensemble.json` plus one checkpoint per member into `dir`.
pub fn save_ensemble(dir: &Path, ensemble: &Ensemble) -> Result<(), RlError> {
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        members: ensemble.len(),
        window: ensemble.window,
        env_actions: ensemble.arch.output_width,
        member_seeds: ensemble.member_seeds.clone(),
        dataset_hash: format!("{:016x}", ensemble.dataset_hash),
    };
    let body = serde_json::to_vec_pretty(&manifest).map_err(|e| RlError::Serde(e.to_string()))?;
    crate::harness::export::atomic_write(&dir.join("ensemble.json"), &body)?;
    for (i, params) in ensemble.members.iter().enumerate() {
        let path = dir.join(format!("member_{i:03}.nncp"));
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            save_params(&mut w, &ensemble.arch, params)?;
        }
        std::fs::rename(&tmp, &path)?;
    }
    Ok(())
}

pub fn load_ensemble(dir: &Path) -> Result<Ensemble, RlError> {
    let manifest: Manifest =
        serde_json::from_reader(BufReader::new(File::open(dir.join("ensemble.json"))?))
            .map_err(|e| RlError::Serde(e.to_string()))?;
    let arch = Architecture::default_stack(
        (monmdp::CHANNELS, manifest.window, manifest.window),
        0,
        manifest.env_actions,
    );
    let mut members = Vec::with_capacity(manifest.members);
    for i in 0..manifest.members {
        let mut r = BufReader::new(File::open(dir.join(format!("member_{i:03}.nncp")))?);
        members.push(load_params_expecting(&mut r, &arch)?);
    }
    let hash = u64::from_str_radix(&manifest.dataset_hash, 16)
        .map_err(|e| RlError::Serde(e.to_string()))?;
    Ok(Ensemble {
        arch,
        window: manifest.window,
        members,
        member_seeds: manifest.member_seeds,
        dataset_hash: hash,
    })
}

/// Serializes an observed-sample dataset (the ensemble's training data) to a
/// compact binary stream.
pub fn save_dataset(path: &Path, steps: &[AgentStep]) -> Result<(), RlError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(b"MRDS");
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&(steps.len() as u64).to_le_bytes());
    for s in steps {
        let obs = &s.state.env;
        buf.push(obs.window);
        buf.extend_from_slice(&obs.cells);
        buf.push(s.state.mon);
        buf.push(s.action.env_action as u8);
        buf.push(s.action.mon_action as u8);
        let v = s.proxy.observed().ok_or_else(|| {
            RlError::Contract("dataset dump requires observed samples".into())
        })?;
        buf.extend_from_slice(&v.to_le_bytes());
        buf.extend_from_slice(&s.mon_reward.to_le_bytes());
    }
    crate::harness::export::atomic_write(path, &buf)
}

pub fn load_dataset(path: &Path) -> Result<Vec<AgentStep>, RlError> {
    use monmdp::{EnvObservation as Obs, JointAction, JointState, ProxyReward};
    let bytes = std::fs::read(path)?;
    let bad = |m: &str| RlError::Serde(format!("dataset file: {m}"));
    if bytes.len() < 16 || &bytes[..4] != b"MRDS" {
        return Err(bad("bad header"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let mut at = 16usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let window = *bytes.get(at).ok_or_else(|| bad("truncated"))? as usize;
        at += 1;
        let cells_len = window * window;
        if bytes.len() < at + cells_len + 3 + 16 {
            return Err(bad("truncated"));
        }
        let cells = bytes[at..at + cells_len].to_vec().into_boxed_slice();
        at += cells_len;
        let mon = bytes[at];
        let env_action = bytes[at + 1] as usize;
        let mon_action = bytes[at + 2] as usize;
        at += 3;
        let value = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        at += 8;
        let mon_reward = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        at += 8;
        let state = JointState { env: Obs { window: window as u8, cells }, mon };
        out.push(AgentStep {
            next_state: state.clone(),
            state,
            action: JointAction { env_action, mon_action },
            proxy: ProxyReward::Observed(value),
            mon_reward,
            truncated: false,
        });
    }
    Ok(out)
}
