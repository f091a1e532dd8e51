//! Config-driven multi-seed runs with content-hash idempotence, plus the
//! cross-seed summary table.

use std::path::PathBuf;

use monmdp::{make_env, MonEnv};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::dqn::{train, Agent, RunMeta, TrainOptions};
use crate::cautious::ensemble::subsample_dataset;
use crate::harness::config::ExperimentConfig;
use crate::harness::export::{read_csv, read_json, write_csv_atomic, write_json_atomic};
use crate::harness::metrics::{EvalSummary, RunRecord};
use crate::harness::stats::bootstrap_ci;
use crate::{tags, RlError};

/// Bumped when training semantics change, so stale cached runs are redone.
pub const CACHE_EPOCH: u32 = 1;

/// Everything that determines a single run's results, hashed for the
/// idempotence check.
fn run_hash(cfg: &ExperimentConfig, seed: u64) -> String {
    #[derive(Serialize)]
    struct HashView<'a> {
        epoch: u32,
        env: &'a str,
        agent: &'a str,
        seed: u64,
        total_steps: u64,
        eval_episodes: u64,
        environment: &'a monmdp::EnvConfig,
        schedule: &'a crate::agents::schedule::TrainingSchedule,
    }
    let view = HashView {
        epoch: CACHE_EPOCH,
        env: &cfg.env,
        agent: &cfg.agent,
        seed,
        total_steps: cfg.total_steps,
        eval_episodes: cfg.eval_episodes,
        environment: &cfg.environment,
        schedule: &cfg.schedule,
    };
    let body = toml::to_string(&view).expect("hash view serializes");
    let mut h: u64 = 0xcbf29ce484222325;
    for b in body.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordMeta {
    env_id: String,
    agent: String,
    seed: u64,
    total_steps: u64,
    episodes: u64,
}

/// Writes a run's artifacts (rows CSV, eval JSON, meta) atomically.
pub fn save_record(dir: &PathBuf, record: &RunRecord) -> Result<(), RlError> {
    std::fs::create_dir_all(dir)?;
    write_csv_atomic(&dir.join("record.csv"), &record.rows)?;
    write_json_atomic(&dir.join("eval.json"), &record.eval)?;
    write_json_atomic(
        &dir.join("meta.json"),
        &RecordMeta {
            env_id: record.env_id.clone(),
            agent: record.agent.clone(),
            seed: record.seed,
            total_steps: record.total_steps,
            episodes: record.episodes,
        },
    )?;
    Ok(())
}

pub fn load_record(dir: &PathBuf) -> Result<RunRecord, RlError> {
    let meta: RecordMeta = read_json(&dir.join("meta.json"))?;
    let rows = read_csv(&dir.join("record.csv"))?;
    let eval: EvalSummary = read_json(&dir.join("eval.json"))?;
    Ok(RunRecord {
        env_id: meta.env_id,
        agent: meta.agent,
        seed: meta.seed,
        total_steps: meta.total_steps,
        episodes: meta.episodes,
        rows,
        eval,
    })
}

/// Runs (or loads, when already complete under the same hash) one seed.
pub fn run_one_seed(cfg: &ExperimentConfig, seed: u64, force: bool) -> Result<RunRecord, RlError> {
    run_one_seed_opts(cfg, seed, force, false)
}

/// Like [`run_one_seed`], optionally resuming an interrupted run from its
/// checkpoint (the replay buffer restarts empty, so a resumed run can differ
/// from an uninterrupted one).
pub fn run_one_seed_opts(
    cfg: &ExperimentConfig,
    seed: u64,
    force: bool,
    resume: bool,
) -> Result<RunRecord, RlError> {
    let dir = cfg.seed_dir(seed);
    let hash = run_hash(cfg, seed);
    let hash_path = dir.join("run.hash");
    if !force {
        if let Ok(existing) = std::fs::read_to_string(&hash_path) {
            if existing.trim() == hash {
                if let Ok(record) = load_record(&dir) {
                    return Ok(record);
                }
            }
        }
    }
    std::fs::create_dir_all(&dir)?;

    let mut env = make_env(&cfg.env, &cfg.environment)?;
    let variant = cfg.variant()?;
    let checkpoint_path = dir.join("checkpoint.bin");
    let (mut agent, resume_state) = if resume && checkpoint_path.exists() {
        let (agent, state) =
            crate::agents::checkpoint::load_checkpoint(&checkpoint_path, cfg.schedule.clone(), seed)?;
        (agent, Some(state))
    } else {
        let agent = Agent::new(
            cfg.agent_variant()?,
            cfg.environment.window,
            env.env_action_count(),
            env.monitor_state_count(),
            env.mon_action_count(),
            cfg.schedule.clone(),
            seed,
        )?;
        (agent, None)
    };
    let meta = RunMeta { env_id: cfg.env.clone(), variant, seed };
    let progress_every = std::env::var("MONRL_PROGRESS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let opts = TrainOptions {
        eval_episodes: cfg.eval_episodes,
        checkpoint_every: cfg.checkpoint_every,
        checkpoint_path: Some(checkpoint_path),
        resume: resume_state,
        progress_every,
    };
    let record = train(&mut agent, &mut env, &meta, cfg.total_steps, &opts)?;

    if cfg.dump_observed {
        let observed: Vec<monmdp::AgentStep> = agent.observed.iter().cloned().collect();
        let capped = subsample_dataset(
            &observed,
            cfg.ensemble.max_dataset,
            monmdp::seeds::derive(seed, tags::DATASET),
        );
        crate::cautious::ensemble::save_dataset(&dir.join("observed.bin"), &capped)?;
    }

    save_record(&dir, &record)?;
    crate::harness::export::atomic_write(&hash_path, hash.as_bytes())?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub exp_dir: PathBuf,
}

/// Per-seed scalar metrics feeding the summary table.
fn seed_metrics(cfg: &ExperimentConfig, record: &RunRecord) -> Vec<(&'static str, f64)> {
    let final_window = cfg.ma_window.max(1).min(record.rows.len().max(1));
    let final_return = if record.rows.is_empty() {
        0.0
    } else {
        record.rows[record.rows.len() - final_window..]
            .iter()
            .map(|r| r.return_true)
            .sum::<f64>()
            / final_window as f64
    };
    let w = &record.eval.water_per_episode;
    vec![
        ("auc", record.auc()),
        ("final_return", final_return),
        ("eval_return", record.eval.mean_return_true),
        ("eval_ask_rate", record.eval.ask_rate),
        ("eval_ask_rate_on_water", record.eval.ask_rate_on_water),
        ("eval_ask_rate_off_water", record.eval.ask_rate_off_water),
        ("eval_water_reward_z1", record.eval.mean_water_reward_zone1),
        ("eval_water_reward_z2", record.eval.mean_water_reward_zone2),
        ("eval_water_plants_z1", w.plants_zone1),
        ("eval_water_plants_z2", w.plants_zone2),
        ("eval_water_cactus_z2", w.cactus_zone2),
        ("eval_water_novel", w.novel_total()),
    ]
}

/// Cross-seed summary: bootstrap mean intervals per metric, invariant to
/// the order seeds appear in the config.
pub fn summarize(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<Vec<SummaryRow>, RlError> {
    let mut ordered: Vec<&RunRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.seed);
    let mut rows = Vec::new();
    if ordered.is_empty() {
        return Ok(rows);
    }
    let metric_names: Vec<&'static str> =
        seed_metrics(cfg, ordered[0]).into_iter().map(|(n, _)| n).collect();
    for (mi, name) in metric_names.iter().enumerate() {
        let values: Vec<f64> = ordered
            .iter()
            .map(|r| seed_metrics(cfg, r)[mi].1)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(tags::BOOTSTRAP, mi as u64));
        let (mean, lo, hi) = bootstrap_ci(&values, cfg.bootstrap_reps, cfg.bootstrap_level, &mut rng)?;
        rows.push(SummaryRow { metric: name.to_string(), mean, lo, hi });
    }
    Ok(rows)
}

/// Executes one run per seed (idempotent per content hash), then writes the
/// summary table.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RlError> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        records.push(run_one_seed(cfg, seed, false)?);
    }
    let summary = summarize(cfg, &records)?;
    let exp_dir = cfg.exp_dir();
    write_csv_atomic(&exp_dir.join("summary.csv"), &summary)?;
    write_json_atomic(&exp_dir.join("summary.json"), &summary)?;
    Ok(ExperimentOutput { records, summary, exp_dir })
}
