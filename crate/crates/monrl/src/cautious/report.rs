//! Watering-frequency report: per plant-category means for a base policy and
//! ratios for robust policies, evaluated on shared episode seeds.

use monmdp::{MonEnv, MonitorVariant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::dqn::evaluate_greedy_rows;
use crate::agents::model::QModel;
use crate::harness::metrics::EpisodeRow;
use crate::harness::stats::bootstrap_ci;
use crate::RlError;

/// Ratio of watering frequencies with the never-watered convention:
/// 0 over 0 reports exactly 1.0.
pub fn water_ratio(base: f64, other: f64) -> f64 {
    if base == 0.0 {
        if other == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        other / base
    }
}

/// The watering categories reported per policy.
pub const CATEGORIES: [&str; 12] = [
    "plants-zone1",
    "plants-zone2",
    "cactus-zone1",
    "cactus-zone2",
    "novel-001",
    "novel-010",
    "novel-100",
    "novel-101",
    "novel-111",
    "novel-all",
    "floor-zone1",
    "floor-zone2",
];

/// Water actions per episode in each category, extracted from one episode.
pub fn category_counts(row: &EpisodeRow) -> [f64; 12] {
    let w = row.water_counts();
    [
        w.plants(1) as f64,
        w.plants(2) as f64,
        w.cactus[0] as f64,
        w.cactus[1] as f64,
        w.novel[0] as f64,
        w.novel[1] as f64,
        w.novel[2] as f64,
        w.novel[3] as f64,
        w.novel[4] as f64,
        w.novel_total() as f64,
        w.floor[0] as f64,
        w.floor[1] as f64,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WateringRow {
    pub category: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    /// Raw per-episode means for each non-base policy.
    pub policy_means: Vec<f64>,
    /// Watering-frequency ratio of each non-base policy to the base.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WateringTable {
    /// Policy names; index 0 is the base all ratios are relative to.
    pub policies: Vec<String>,
    pub rows: Vec<WateringRow>,
    pub episodes: u64,
}

/// Evaluates every policy greedily over the same episode seeds and reports
/// per-category watering frequencies: base mean with a bootstrap interval
/// over episodes, plus frequency ratios for the other policies.
#[allow(clippy::too_many_arguments)]
pub fn watering_ratio_report<E: MonEnv + ?Sized>(
    policies: &mut [(String, &mut QModel)],
    env: &mut E,
    variant: MonitorVariant,
    episodes: u64,
    seed: u64,
    bootstrap_reps: usize,
    bootstrap_level: f64,
) -> Result<WateringTable, RlError> {
    if episodes == 0 {
        return Err(RlError::Config("watering report needs at least one episode".into()));
    }
    if policies.is_empty() {
        return Err(RlError::Config("watering report needs at least one policy".into()));
    }
    // Common random numbers: every policy sees the same episode seeds.
    let mut per_policy: Vec<Vec<[f64; 12]>> = Vec::with_capacity(policies.len());
    for (_, q) in policies.iter_mut() {
        let rows = evaluate_greedy_rows(q, env, variant, episodes, seed)?;
        per_policy.push(rows.iter().map(category_counts).collect());
    }

    let mut rows = Vec::with_capacity(CATEGORIES.len());
    for (ci, name) in CATEGORIES.iter().enumerate() {
        let base_vals: Vec<f64> = per_policy[0].iter().map(|c| c[ci]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(seed, ci as u64));
        let (mean, lo, hi) = bootstrap_ci(&base_vals, bootstrap_reps, bootstrap_level, &mut rng)?;
        let policy_means: Vec<f64> = per_policy[1..]
            .iter()
            .map(|counts| counts.iter().map(|c| c[ci]).sum::<f64>() / counts.len() as f64)
            .collect();
        let ratios = policy_means.iter().map(|&m| water_ratio(mean, m)).collect();
        rows.push(WateringRow { category: name.to_string(), mean, lo, hi, policy_means, ratios });
    }
    Ok(WateringTable {
        policies: policies.iter().map(|(n, _)| n.clone()).collect(),
        rows,
        episodes,
    })
}
