//! Per-episode metric rows and run records: the stream every table and
//! curve is computed from.

use monmdp::{EpisodeLog, JointState, MonitorVariant, NOVEL_TRIPLES};
use serde::{Deserialize, Serialize};

/// What a water action landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaterTarget {
    PlantDry,
    PlantWet,
    Cactus,
    /// Index into the novel-encoding set.
    Novel(u8),
    Floor,
}

/// Decodes the watered cell from the agent's own observation: the acted cell
/// is the window center, and for spatial monitors the acting zone is carried
/// by the monitor state (1 = monitored zone 1). Non-spatial variants
/// attribute everything to zone 1.
pub fn water_target(state: &JointState, variant: MonitorVariant) -> (WaterTarget, u8) {
    let w = state.env.window as usize;
    let center = state.env.cells[(w / 2) * w + (w / 2)];
    let triple = [center & 1, (center >> 1) & 1, (center >> 2) & 1];
    let dryness = (center >> 3) & 0b11;
    let target = if triple == [0, 0, 0] {
        WaterTarget::Floor
    } else if triple == [1, 1, 0] {
        if dryness >= 1 {
            WaterTarget::PlantDry
        } else {
            WaterTarget::PlantWet
        }
    } else if triple == [0, 1, 1] {
        WaterTarget::Cactus
    } else {
        let idx = NOVEL_TRIPLES
            .iter()
            .position(|t| *t == triple)
            .expect("triple is one of the novel codes");
        WaterTarget::Novel(idx as u8)
    };
    let zone = if variant.is_spatial() {
        if state.mon == 1 {
            1
        } else {
            2
        }
    } else {
        1
    };
    (target, zone)
}

/// Water-action counts keyed by (category, zone).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WaterCounts {
    pub plant_dry: [u32; 2],
    pub plant_wet: [u32; 2],
    pub cactus: [u32; 2],
    pub novel: [u32; 5],
    pub floor: [u32; 2],
}

impl WaterCounts {
    pub fn record(&mut self, target: WaterTarget, zone: u8) {
        let z = (zone.clamp(1, 2) - 1) as usize;
        match target {
            WaterTarget::PlantDry => self.plant_dry[z] += 1,
            WaterTarget::PlantWet => self.plant_wet[z] += 1,
            WaterTarget::Cactus => self.cactus[z] += 1,
            WaterTarget::Novel(i) => self.novel[i as usize % 5] += 1,
            WaterTarget::Floor => self.floor[z] += 1,
        }
    }

    pub fn plants(&self, zone: u8) -> u32 {
        let z = (zone.clamp(1, 2) - 1) as usize;
        self.plant_dry[z] + self.plant_wet[z]
    }

    pub fn novel_total(&self) -> u32 {
        self.novel.iter().sum()
    }
}

/// One training episode's metrics. Kept flat so it maps directly onto a CSV
/// row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub steps: u32,
    /// True environment reward plus monitor reward.
    pub return_true: f64,
    pub return_env: f64,
    pub return_mon: f64,
    /// Environment reward attributed to the zone the agent acted from.
    pub env_reward_zone1: f64,
    pub env_reward_zone2: f64,
    /// Environment reward from water actions only, per acting zone.
    pub water_reward_zone1: f64,
    pub water_reward_zone2: f64,
    pub asks: u32,
    pub water_steps: u32,
    pub asks_on_water: u32,
    pub epsilon: f64,
    pub water_plant_dry_z1: u32,
    pub water_plant_dry_z2: u32,
    pub water_plant_wet_z1: u32,
    pub water_plant_wet_z2: u32,
    pub water_cactus_z1: u32,
    pub water_cactus_z2: u32,
    pub water_novel_0: u32,
    pub water_novel_1: u32,
    pub water_novel_2: u32,
    pub water_novel_3: u32,
    pub water_novel_4: u32,
    pub water_floor_z1: u32,
    pub water_floor_z2: u32,
    pub drying_events: u32,
    /// Mean losses of the training round that ended on this episode, when
    /// one ran.
    pub q_loss: Option<f64>,
    pub reward_loss: Option<f64>,
    pub q_updates: Option<u64>,
}

impl EpisodeRow {
    pub fn water_counts(&self) -> WaterCounts {
        WaterCounts {
            plant_dry: [self.water_plant_dry_z1, self.water_plant_dry_z2],
            plant_wet: [self.water_plant_wet_z1, self.water_plant_wet_z2],
            cactus: [self.water_cactus_z1, self.water_cactus_z2],
            novel: [
                self.water_novel_0,
                self.water_novel_1,
                self.water_novel_2,
                self.water_novel_3,
                self.water_novel_4,
            ],
            floor: [self.water_floor_z1, self.water_floor_z2],
        }
    }

    fn set_water_counts(&mut self, w: WaterCounts) {
        self.water_plant_dry_z1 = w.plant_dry[0];
        self.water_plant_dry_z2 = w.plant_dry[1];
        self.water_plant_wet_z1 = w.plant_wet[0];
        self.water_plant_wet_z2 = w.plant_wet[1];
        self.water_cactus_z1 = w.cactus[0];
        self.water_cactus_z2 = w.cactus[1];
        self.water_novel_0 = w.novel[0];
        self.water_novel_1 = w.novel[1];
        self.water_novel_2 = w.novel[2];
        self.water_novel_3 = w.novel[3];
        self.water_novel_4 = w.novel[4];
        self.water_floor_z1 = w.floor[0];
        self.water_floor_z2 = w.floor[1];
    }
}

/// Aggregates of the final greedy evaluation (exploration off).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: u64,
    pub steps: u64,
    pub mean_return_true: f64,
    /// Monitor-ask frequency per step.
    pub ask_rate: f64,
    /// Ask frequency conditioned on watering / non-watering steps.
    pub ask_rate_on_water: f64,
    pub ask_rate_off_water: f64,
    pub mean_water_reward_zone1: f64,
    pub mean_water_reward_zone2: f64,
    /// Mean water actions per episode, by category.
    pub water_per_episode: WaterPerEpisode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WaterPerEpisode {
    pub plants_zone1: f64,
    pub plants_zone2: f64,
    pub cactus_zone1: f64,
    pub cactus_zone2: f64,
    pub novel: [f64; 5],
    pub floor_zone1: f64,
    pub floor_zone2: f64,
}

impl WaterPerEpisode {
    pub fn novel_total(&self) -> f64 {
        self.novel.iter().sum()
    }
}

/// A full training run: per-episode rows plus the final evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env_id: String,
    pub agent: String,
    pub seed: u64,
    pub total_steps: u64,
    pub episodes: u64,
    pub rows: Vec<EpisodeRow>,
    pub eval: EvalSummary,
}

impl RunRecord {
    /// Mean per-episode true return over the training horizon.
    pub fn auc(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.return_true).sum::<f64>() / self.rows.len() as f64
    }
}

/// Accumulates one episode's metrics from its log.
pub fn episode_row(
    log: &EpisodeLog,
    variant: MonitorVariant,
    episode: u64,
    epsilon: f64,
    drying_events: u32,
) -> EpisodeRow {
    let mut counts = WaterCounts::default();
    let mut row = EpisodeRow {
        episode,
        steps: log.transitions.len() as u32,
        return_true: 0.0,
        return_env: 0.0,
        return_mon: 0.0,
        env_reward_zone1: 0.0,
        env_reward_zone2: 0.0,
        water_reward_zone1: 0.0,
        water_reward_zone2: 0.0,
        asks: 0,
        water_steps: 0,
        asks_on_water: 0,
        epsilon,
        water_plant_dry_z1: 0,
        water_plant_dry_z2: 0,
        water_plant_wet_z1: 0,
        water_plant_wet_z2: 0,
        water_cactus_z1: 0,
        water_cactus_z2: 0,
        water_novel_0: 0,
        water_novel_1: 0,
        water_novel_2: 0,
        water_novel_3: 0,
        water_novel_4: 0,
        water_floor_z1: 0,
        water_floor_z2: 0,
        drying_events,
        q_loss: None,
        reward_loss: None,
        q_updates: None,
    };
    for t in &log.transitions {
        row.return_env += t.true_env_reward;
        row.return_mon += t.mon_reward;
        let watering = t.action.env_action == monmdp::EnvAction::Water.index();
        let asked = variant == MonitorVariant::Binary && t.action.mon_action == monmdp::MON_ASK;
        if asked {
            row.asks += 1;
        }
        let (target, zone) = water_target(&t.state, variant);
        if zone == 1 {
            row.env_reward_zone1 += t.true_env_reward;
        } else {
            row.env_reward_zone2 += t.true_env_reward;
        }
        if watering {
            row.water_steps += 1;
            if asked {
                row.asks_on_water += 1;
            }
            counts.record(target, zone);
            if zone == 1 {
                row.water_reward_zone1 += t.true_env_reward;
            } else {
                row.water_reward_zone2 += t.true_env_reward;
            }
        }
    }
    row.return_true = row.return_env + row.return_mon;
    row.set_water_counts(counts);
    row
}

/// Folds episode rows into an evaluation summary.
pub fn summarize_eval(rows: &[EpisodeRow]) -> EvalSummary {
    let episodes = rows.len() as u64;
    let steps: u64 = rows.iter().map(|r| r.steps as u64).sum();
    let n = episodes.max(1) as f64;
    let total_asks: u64 = rows.iter().map(|r| r.asks as u64).sum();
    let water_steps: u64 = rows.iter().map(|r| r.water_steps as u64).sum();
    let asks_on_water: u64 = rows.iter().map(|r| r.asks_on_water as u64).sum();
    let off_steps = steps.saturating_sub(water_steps);
    let asks_off_water = total_asks.saturating_sub(asks_on_water);
    let frac = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mean_count = |f: &dyn Fn(&WaterCounts) -> u32| {
        rows.iter().map(|r| f(&r.water_counts()) as f64).sum::<f64>() / n
    };
    let mut novel = [0.0f64; 5];
    for (i, slot) in novel.iter_mut().enumerate() {
        *slot = mean_count(&|w: &WaterCounts| w.novel[i]);
    }
    EvalSummary {
        episodes,
        steps,
        mean_return_true: rows.iter().map(|r| r.return_true).sum::<f64>() / n,
        ask_rate: frac(total_asks, steps),
        ask_rate_on_water: frac(asks_on_water, water_steps),
        ask_rate_off_water: frac(asks_off_water, off_steps),
        mean_water_reward_zone1: rows.iter().map(|r| r.water_reward_zone1).sum::<f64>() / n,
        mean_water_reward_zone2: rows.iter().map(|r| r.water_reward_zone2).sum::<f64>() / n,
        water_per_episode: WaterPerEpisode {
            plants_zone1: mean_count(&|w| w.plants(1)),
            plants_zone2: mean_count(&|w| w.plants(2)),
            cactus_zone1: mean_count(&|w| w.cactus[0]),
            cactus_zone2: mean_count(&|w| w.cactus[1]),
            novel,
            floor_zone1: mean_count(&|w| w.floor[0]),
            floor_zone2: mean_count(&|w| w.floor[1]),
        },
    }
}
