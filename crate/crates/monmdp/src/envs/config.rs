//! Environment configuration, loadable from the `[env]` section of an
//! experiment file.

use serde::{Deserialize, Serialize};

use crate::envs::grid::FloraCounts;
use crate::envs::monitor::MonitorVariant;
use crate::EnvError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub width: usize,
    pub height: usize,
    /// Egocentric window size (odd).
    pub window: usize,
    pub dryness_rate: f64,
    pub step_limit: usize,
    /// Scale knob: plants per zone per kind; the variant derives its flora
    /// composition from this unless overridden below.
    pub flora_per_zone_per_kind: usize,
    pub plants_zone1: Option<usize>,
    pub plants_zone2: Option<usize>,
    pub cacti_zone1: Option<usize>,
    pub cacti_zone2: Option<usize>,
    pub novel_zone1: Option<usize>,
    pub novel_zone2: Option<usize>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            width: 10,
            height: 10,
            window: 11,
            dryness_rate: 0.05,
            step_limit: 100,
            flora_per_zone_per_kind: 4,
            plants_zone1: None,
            plants_zone2: None,
            cacti_zone1: None,
            cacti_zone2: None,
            novel_zone1: None,
            novel_zone2: None,
        }
    }
}

impl EnvConfig {
    /// The desk-scale variant used throughout the test suites: 6x6 grid,
    /// window 7, two plants per zone per kind.
    pub fn desk() -> Self {
        EnvConfig {
            width: 6,
            height: 6,
            window: 7,
            flora_per_zone_per_kind: 2,
            ..EnvConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.width == 0 || self.height == 0 {
            return Err(EnvError::Config("grid must be non-empty".into()));
        }
        if self.window % 2 == 0 || self.window == 0 {
            return Err(EnvError::Config("window must be odd".into()));
        }
        if !(0.0..=1.0).contains(&self.dryness_rate) {
            return Err(EnvError::Config("dryness_rate must be in [0, 1]".into()));
        }
        if self.step_limit == 0 {
            return Err(EnvError::Config("step_limit must be >= 1".into()));
        }
        Ok(())
    }

    /// Resolves the flora composition for a variant, applying overrides.
    pub fn counts(&self, variant: MonitorVariant) -> FloraCounts {
        let mut c = variant.flora_counts(self.flora_per_zone_per_kind);
        if let Some(n) = self.plants_zone1 {
            c.plants[0] = n;
        }
        if let Some(n) = self.plants_zone2 {
            c.plants[1] = n;
        }
        if let Some(n) = self.cacti_zone1 {
            c.cacti[0] = n;
        }
        if let Some(n) = self.cacti_zone2 {
            c.cacti[1] = n;
        }
        if let Some(n) = self.novel_zone1 {
            c.novel[0] = n;
        }
        if let Some(n) = self.novel_zone2 {
            c.novel[1] = n;
        }
        c
    }
}
