//! The caution pipeline: per seed, train the base reward-model agent, fit an
//! ensemble on its observed samples, run each robustness preset through the
//! k-of-N optimizer, and evaluate watering frequencies; then aggregate
//! ratios across seeds with paired bootstrap intervals.

use monmdp::make_env;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::checkpoint::load_checkpoint;
use crate::agents::model::QModel;
use crate::cautious::ensemble::{load_dataset, load_ensemble, save_ensemble, train_ensemble, Ensemble};
use crate::cautious::kofn::{run_k_of_n, KofnConfig};
use crate::cautious::report::{water_ratio, watering_ratio_report, WateringTable, CATEGORIES};
use crate::harness::config::ExperimentConfig;
use crate::harness::experiment::{run_one_seed, CACHE_EPOCH};
use crate::harness::export::{atomic_write, read_json, write_json_atomic};
use crate::harness::stats::bootstrap_stat_ci;
use crate::{tags, RlError};

fn fnv(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn stage_fresh(dir: &std::path::Path, hash: &str) -> bool {
    std::fs::read_to_string(dir.join("stage.hash"))
        .map(|s| s.trim() == hash)
        .unwrap_or(false)
}

fn mark_stage(dir: &std::path::Path, hash: &str) -> Result<(), RlError> {
    atomic_write(&dir.join("stage.hash"), hash.as_bytes())
}

/// Trains (or loads) the base reward-model run for a seed, with the observed
/// dataset dumped for the ensemble stage.
pub fn ensure_base(cfg: &ExperimentConfig, seed: u64) -> Result<(), RlError> {
    let mut base_cfg = cfg.clone();
    base_cfg.agent = "reward-model".into();
    base_cfg.dump_observed = true;
    run_one_seed(&base_cfg, seed, false)?;
    Ok(())
}

/// Trains (or loads) the seed's reward-model ensemble from the dumped
/// observed dataset.
pub fn ensure_ensemble(cfg: &ExperimentConfig, seed: u64) -> Result<Ensemble, RlError> {
    ensure_base(cfg, seed)?;
    let seed_dir = cfg.seed_dir(seed);
    let dir = seed_dir.join("ensemble");
    let hash = fnv(&format!(
        "{CACHE_EPOCH}|{}|{}",
        toml::to_string(&cfg.ensemble).expect("ensemble config serializes"),
        seed
    ));
    if stage_fresh(&dir, &hash) {
        if let Ok(ens) = load_ensemble(&dir) {
            return Ok(ens);
        }
    }
    let dataset = load_dataset(&seed_dir.join("observed.bin"))?;
    let ensemble = train_ensemble(
        &dataset,
        cfg.environment.window,
        monmdp::ENV_ACTION_COUNT,
        &cfg.ensemble,
        seed,
    )?;
    save_ensemble(&dir, &ensemble)?;
    mark_stage(&dir, &hash)?;
    Ok(ensemble)
}

/// Loads the base agent's Q-model from the seed's checkpoint.
pub fn load_base_policy(cfg: &ExperimentConfig, seed: u64) -> Result<QModel, RlError> {
    let path = cfg.seed_dir(seed).join("checkpoint.bin");
    let (agent, _state) = load_checkpoint(&path, cfg.schedule.clone(), seed)?;
    Ok(agent.q)
}

/// Runs (or loads) one robustness preset for a seed. All presets of a seed
/// share the same derived sampling/evaluation streams, so comparisons are
/// paired: only k differs.
pub fn ensure_robust(
    cfg: &ExperimentConfig,
    seed: u64,
    preset: &str,
    base: &QModel,
    ensemble: &Ensemble,
) -> Result<QModel, RlError> {
    let (k, n) = KofnConfig::preset(preset)
        .ok_or_else(|| RlError::Config(format!("unknown k-of-N preset: {preset}")))?;
    let dir = cfg.seed_dir(seed).join(format!("kofn_{k}_of_{n}"));
    let kcfg = cfg.kofn.clone().with_preset(k, n);
    let hash = fnv(&format!(
        "{CACHE_EPOCH}|{}|{:016x}|{}",
        toml::to_string(&kcfg).expect("kofn config serializes"),
        ensemble.dataset_hash,
        seed
    ));
    if stage_fresh(&dir, &hash) {
        let mut r = std::io::BufReader::new(std::fs::File::open(dir.join("policy.nncp"))?);
        let params = nanonet::load_params_expecting(&mut r, &base.arch)?;
        let mut q = base.clone();
        q.online = params;
        q.sync_target();
        return Ok(q);
    }
    std::fs::create_dir_all(&dir)?;
    let mut env = make_env(&cfg.env, &cfg.environment)?;
    let (policy, diags) = run_k_of_n(base, ensemble, &kcfg, &mut env, seed)?;
    {
        let tmp = dir.join("policy.tmp");
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        nanonet::save_params(&mut w, &base.arch, &policy.q)?;
        drop(w);
        std::fs::rename(tmp, dir.join("policy.nncp"))?;
    }
    write_json_atomic(&dir.join("iterations.json"), &diags)?;
    write_json_atomic(&dir.join("provenance.json"), &policy.provenance)?;
    mark_stage(&dir, &hash)?;
    let mut q = base.clone();
    q.online = policy.q;
    q.sync_target();
    Ok(q)
}

/// Produces (or loads) the per-seed watering table over the base policy and
/// every configured preset, evaluated on shared episode seeds.
pub fn seed_watering_table(cfg: &ExperimentConfig, seed: u64) -> Result<WateringTable, RlError> {
    let seed_dir = cfg.seed_dir(seed);
    let path = seed_dir.join("watering.json");
    let hash = fnv(&format!(
        "{CACHE_EPOCH}|{}|{}|{:?}|{}|{}",
        toml::to_string(&cfg.kofn).expect("serializes"),
        toml::to_string(&cfg.ensemble).expect("serializes"),
        cfg.kofn_presets,
        cfg.report_episodes,
        seed
    ));
    if stage_fresh(&seed_dir, &hash) {
        if let Ok(table) = read_json::<WateringTable>(&path) {
            return Ok(table);
        }
    }
    let ensemble = ensure_ensemble(cfg, seed)?;
    let mut base = load_base_policy(cfg, seed)?;
    let mut robust = Vec::new();
    for preset in &cfg.kofn_presets {
        robust.push((preset.clone(), ensure_robust(cfg, seed, preset, &base, &ensemble)?));
    }
    let mut env = make_env(&cfg.env, &cfg.environment)?;
    let mut policies: Vec<(String, &mut QModel)> =
        vec![("reward-model".to_string(), &mut base)];
    for (name, q) in robust.iter_mut() {
        policies.push((name.clone(), q));
    }
    let table = watering_ratio_report(
        &mut policies,
        &mut env,
        cfg.variant()?,
        cfg.report_episodes,
        monmdp::seeds::derive(seed, tags::REPORT),
        cfg.bootstrap_reps,
        cfg.bootstrap_level,
    )?;
    write_json_atomic(&path, &table)?;
    mark_stage(&seed_dir, &hash)?;
    Ok(table)
}

/// One aggregated table row: cross-seed base frequency and, per preset, the
/// ratio of seed-mean frequencies with a paired bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggRow {
    pub category: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub ratio_mean: Vec<f64>,
    pub ratio_lo: Vec<f64>,
    pub ratio_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CautionOutput {
    pub presets: Vec<String>,
    pub rows: Vec<AggRow>,
    pub per_seed: Vec<WateringTable>,
}

/// Cross-seed aggregation: base frequencies via bootstrap over seeds; ratios
/// as ratio-of-seed-means, resampling seeds pairwise.
pub fn aggregate_watering(
    cfg: &ExperimentConfig,
    tables: &[WateringTable],
) -> Result<CautionOutput, RlError> {
    if tables.is_empty() {
        return Err(RlError::Config("no watering tables to aggregate".into()));
    }
    let presets: Vec<String> = tables[0].policies[1..].to_vec();
    let n = tables.len();
    let mut rows = Vec::with_capacity(CATEGORIES.len());
    for (ci, name) in CATEGORIES.iter().enumerate() {
        let base: Vec<f64> = tables.iter().map(|t| t.rows[ci].mean).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(tags::REPORT, ci as u64));
        let (mean, lo, hi) =
            bootstrap_stat_ci(n, cfg.bootstrap_reps, cfg.bootstrap_level, &mut rng, |idx| {
                idx.iter().map(|&i| base[i]).sum::<f64>() / idx.len() as f64
            })?;
        let mut ratio_mean = Vec::new();
        let mut ratio_lo = Vec::new();
        let mut ratio_hi = Vec::new();
        for (pi, _) in presets.iter().enumerate() {
            let robust: Vec<f64> = tables.iter().map(|t| t.rows[ci].policy_means[pi]).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(
                tags::REPORT,
                0x1000 + (ci * 16 + pi) as u64,
            ));
            let (m, l, h) =
                bootstrap_stat_ci(n, cfg.bootstrap_reps, cfg.bootstrap_level, &mut rng, |idx| {
                    let b: f64 = idx.iter().map(|&i| base[i]).sum::<f64>() / idx.len() as f64;
                    let r: f64 = idx.iter().map(|&i| robust[i]).sum::<f64>() / idx.len() as f64;
                    water_ratio(b, r)
                })?;
            ratio_mean.push(m);
            ratio_lo.push(l);
            ratio_hi.push(h);
        }
        rows.push(AggRow { category: name.to_string(), mean, lo, hi, ratio_mean, ratio_lo, ratio_hi });
    }
    Ok(CautionOutput { presets, rows, per_seed: tables.to_vec() })
}

/// Writes the aggregated table as CSV: one row per category, base columns
/// then ratio columns per preset.
pub fn write_caution_csv(
    path: &std::path::Path,
    out: &CautionOutput,
) -> Result<(), RlError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["category".to_string(), "mean".into(), "lo".into(), "hi".into()];
    for p in &out.presets {
        header.push(format!("ratio_{p}"));
        header.push(format!("ratio_{p}_lo"));
        header.push(format!("ratio_{p}_hi"));
    }
    w.write_record(&header).map_err(|e| RlError::Serde(e.to_string()))?;
    for row in &out.rows {
        let mut rec = vec![
            row.category.clone(),
            format!("{}", row.mean),
            format!("{}", row.lo),
            format!("{}", row.hi),
        ];
        for pi in 0..out.presets.len() {
            rec.push(format!("{}", row.ratio_mean[pi]));
            rec.push(format!("{}", row.ratio_lo[pi]));
            rec.push(format!("{}", row.ratio_hi[pi]));
        }
        w.write_record(&rec).map_err(|e| RlError::Serde(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| RlError::Serde(e.to_string()))?;
    atomic_write(path, &bytes)
}

/// The full pipeline over every configured seed.
pub fn run_caution_pipeline(cfg: &ExperimentConfig) -> Result<CautionOutput, RlError> {
    cfg.validate()?;
    if cfg.kofn_presets.is_empty() {
        return Err(RlError::Config("caution pipeline needs at least one preset".into()));
    }
    let mut tables = Vec::with_capacity(cfg.seeds.len());
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    for seed in seeds {
        tables.push(seed_watering_table(cfg, seed)?);
    }
    let out = aggregate_watering(cfg, &tables)?;
    write_caution_csv(&cfg.exp_dir().join("watering_table.csv"), &out)?;
    write_json_atomic(&cfg.exp_dir().join("watering_table.json"), &out)?;
    Ok(out)
}
