//! Experiment configuration: one TOML file drives environment, agent,
//! schedule, ensemble, and k-of-N settings.

use std::path::{Path, PathBuf};

use monmdp::{EnvConfig, MonitorVariant};
use serde::{Deserialize, Serialize};

use crate::agents::dqn::AgentVariant;
use crate::agents::schedule::TrainingSchedule;
use crate::cautious::ensemble::EnsembleConfig;
use crate::cautious::kofn::KofnConfig;
use crate::RlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment name; runs land in `<out_dir>/<name>/seed_<s>/`.
    pub name: String,
    /// Environment id (binary, half-room, plant-cactus, botanical-garden,
    /// always-on).
    pub env: String,
    /// Agent id (reward-model, bot-zero, ignore).
    pub agent: String,
    pub seeds: Vec<u64>,
    pub total_steps: u64,
    /// Greedy evaluation episodes after training.
    pub eval_episodes: u64,
    pub out_dir: PathBuf,
    /// Checkpoint cadence in episodes (0 = final checkpoint only).
    pub checkpoint_every: u64,
    /// Dump the observed-sample dataset for ensemble training.
    pub dump_observed: bool,
    /// Moving-average window for frequency curves.
    pub ma_window: usize,
    pub bootstrap_reps: usize,
    pub bootstrap_level: f64,
    /// Episodes per policy in the watering-frequency report.
    pub report_episodes: u64,
    /// Robustness presets exercised by the caution pipeline.
    pub kofn_presets: Vec<String>,
    pub environment: EnvConfig,
    pub schedule: TrainingSchedule,
    pub ensemble: EnsembleConfig,
    pub kofn: KofnConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            env: "binary".into(),
            agent: "reward-model".into(),
            seeds: vec![0],
            total_steps: 1_000_000,
            eval_episodes: 100,
            out_dir: PathBuf::from("out"),
            checkpoint_every: 0,
            dump_observed: false,
            ma_window: 100,
            bootstrap_reps: 10_000,
            bootstrap_level: 0.95,
            report_episodes: 200,
            kofn_presets: vec!["10-of-10".into(), "5-of-10".into(), "1-of-10".into()],
            environment: EnvConfig::default(),
            schedule: TrainingSchedule::default(),
            ensemble: EnsembleConfig::default(),
            kofn: KofnConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load_toml(path: &Path) -> Result<ExperimentConfig, RlError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| RlError::Config(format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn variant(&self) -> Result<MonitorVariant, RlError> {
        MonitorVariant::from_id(&self.env)
            .ok_or_else(|| RlError::Config(format!("unknown environment id: {}", self.env)))
    }

    pub fn agent_variant(&self) -> Result<AgentVariant, RlError> {
        AgentVariant::from_id(&self.agent)
            .ok_or_else(|| RlError::Config(format!("unknown agent id: {}", self.agent)))
    }

    pub fn validate(&self) -> Result<(), RlError> {
        self.variant()?;
        self.agent_variant()?;
        self.environment.validate()?;
        self.schedule.validate()?;
        self.kofn.validate()?;
        if self.seeds.is_empty() {
            return Err(RlError::Config("at least one seed required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(RlError::Config("seeds must be distinct".into()));
        }
        for preset in &self.kofn_presets {
            if KofnConfig::preset(preset).is_none() {
                return Err(RlError::Config(format!("unknown k-of-N preset: {preset}")));
            }
        }
        if !(0.0..1.0).contains(&self.bootstrap_level) || self.bootstrap_reps == 0 {
            return Err(RlError::Config("bad bootstrap settings".into()));
        }
        Ok(())
    }

    pub fn exp_dir(&self) -> PathBuf {
        self.out_dir.join(&self.name)
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.exp_dir().join(format!("seed_{seed}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.schedule.gamma, 0.99);
        assert_eq!(cfg.environment.window, 11);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            name = "desk"
            env = "half-room"
            seeds = [1, 2, 3]
            [environment]
            width = 6
            height = 6
            window = 7
            flora_per_zone_per_kind = 2
            [schedule]
            lr_q = 2e-4
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.env, "half-room");
        assert_eq!(cfg.environment.width, 6);
        assert_eq!(cfg.schedule.lr_q, 2e-4);
        assert_eq!(cfg.schedule.gamma, 0.99);
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let cfg = ExperimentConfig { seeds: vec![1, 1], ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let cfg = ExperimentConfig { env: "volcano".into(), ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig { agent: "psychic".into(), ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
