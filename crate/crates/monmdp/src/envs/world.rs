//! The concrete monitored environment: a plant-watering grid paired with one
//! of the monitor variants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::envs::config::EnvConfig;
use crate::envs::grid::{EnvAction, FloraCounts, GridWorld, ENV_ACTION_COUNT};
use crate::envs::monitor::{monitor_step, MonitorVariant};
use crate::envs::observe::encode_observation;
use crate::seeds::{self, stream};
use crate::{EnvError, EnvObservation, JointAction, JointState, MonEnv, MonState, Transition};

pub struct PlantWorld {
    variant: MonitorVariant,
    cfg: EnvConfig,
    counts: FloraCounts,
    world: Option<GridWorld>,
    drying: ChaCha8Rng,
    obs: EnvObservation,
    mon: MonState,
    steps: usize,
    truncated: bool,
}

impl PlantWorld {
    pub fn new(variant: MonitorVariant, cfg: EnvConfig) -> Result<PlantWorld, EnvError> {
        cfg.validate()?;
        let counts = cfg.counts(variant);
        // Fail configuration problems eagerly: a layout must be possible.
        {
            let mut probe = ChaCha8Rng::seed_from_u64(0);
            GridWorld::random_layout(cfg.width, cfg.height, cfg.dryness_rate, &counts, &mut probe)?;
        }
        Ok(PlantWorld {
            variant,
            cfg,
            counts,
            world: None,
            drying: ChaCha8Rng::seed_from_u64(0),
            obs: EnvObservation { window: 1, cells: vec![0].into_boxed_slice() },
            mon: 0,
            steps: 0,
            truncated: false,
        })
    }

    pub fn variant(&self) -> MonitorVariant {
        self.variant
    }

    pub fn cfg(&self) -> &EnvConfig {
        &self.cfg
    }

    /// The current grid, if an episode has started. Exposed for rendering
    /// and for metric attribution.
    pub fn world(&self) -> Option<&GridWorld> {
        self.world.as_ref()
    }

    pub fn drying_events(&self) -> u64 {
        self.world.as_ref().map_or(0, |w| w.drying_events())
    }

    fn joint_state(&self) -> JointState {
        JointState { env: self.obs.clone(), mon: self.mon }
    }
}

impl MonEnv for PlantWorld {
    fn env_action_count(&self) -> usize {
        ENV_ACTION_COUNT
    }

    fn drying_events(&self) -> u64 {
        PlantWorld::drying_events(self)
    }

    fn mon_action_count(&self) -> usize {
        self.variant.mon_action_count()
    }

    fn monitor_state_count(&self) -> usize {
        self.variant.monitor_state_count()
    }

    fn step_limit(&self) -> usize {
        self.cfg.step_limit
    }

    fn reset(&mut self, episode_seed: u64) -> JointState {
        let mut layout = ChaCha8Rng::seed_from_u64(seeds::derive(episode_seed, stream::LAYOUT));
        self.drying = ChaCha8Rng::seed_from_u64(seeds::derive(episode_seed, stream::DRYING));
        let world = GridWorld::random_layout(
            self.cfg.width,
            self.cfg.height,
            self.cfg.dryness_rate,
            &self.counts,
            &mut layout,
        )
        .expect("layout feasibility checked at construction");
        self.mon = self.variant.initial_mon_state(world.agent_zone());
        self.obs = encode_observation(&world, self.cfg.window);
        self.world = Some(world);
        self.steps = 0;
        self.truncated = false;
        self.joint_state()
    }

    fn step(&mut self, action: JointAction) -> Result<Transition, EnvError> {
        let world = self
            .world
            .as_mut()
            .ok_or_else(|| EnvError::Usage("step before reset".into()))?;
        if self.truncated {
            return Err(EnvError::Usage("step on a truncated episode".into()));
        }
        if action.mon_action >= self.variant.mon_action_count() {
            return Err(EnvError::Usage(format!(
                "monitor action {} out of range",
                action.mon_action
            )));
        }
        let env_action = EnvAction::from_index(action.env_action)
            .ok_or_else(|| EnvError::Usage(format!("env action {} out of range", action.env_action)))?;

        let state = JointState { env: self.obs.clone(), mon: self.mon };
        let r_env = world.apply_action(env_action);
        world.apply_drying(&mut self.drying);
        let (proxy, mon_reward, mon_next) =
            monitor_step(self.variant, self.mon, world.agent_zone(), action.mon_action, r_env);

        self.steps += 1;
        self.truncated = self.steps >= self.cfg.step_limit;
        let next_obs = encode_observation(world, self.cfg.window);
        let next_state = JointState { env: next_obs.clone(), mon: mon_next };
        self.obs = next_obs;
        self.mon = mon_next;

        Ok(Transition {
            state,
            action,
            proxy,
            mon_reward,
            next_state,
            truncated: self.truncated,
            true_env_reward: r_env,
        })
    }
}

/// Known environment ids.
pub const ENV_IDS: [&str; 5] =
    ["binary", "half-room", "plant-cactus", "botanical-garden", "always-on"];

/// Builds a registered environment by id.
pub fn make_env(id: &str, cfg: &EnvConfig) -> Result<PlantWorld, EnvError> {
    let variant = MonitorVariant::from_id(id)
        .ok_or_else(|| EnvError::UnknownEnv(format!("{id} (known: {})", ENV_IDS.join(", "))))?;
    PlantWorld::new(variant, cfg.clone())
}
