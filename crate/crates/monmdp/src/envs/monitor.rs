//! Monitor variants: who observes the reward, when, and at what cost.

use serde::{Deserialize, Serialize};

use crate::envs::grid::FloraCounts;
use crate::{MonState, ProxyReward};

/// Monitor action indices for the binary variant.
pub const MON_NOT_ASK: usize = 0;
pub const MON_ASK: usize = 1;

/// Monitoring cost charged by the binary monitor on an ask step.
pub const ASK_COST: f64 = -0.2;

/// The four experiment monitors plus a plain-MDP wrapper where the reward is
/// always observed for free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorVariant {
    /// Ask/not-ask monitor actions; asking reveals the reward at a cost.
    Binary,
    /// Monitoring is on exactly in the left half of the room.
    HalfRoom,
    /// Half-room monitoring with cacti added to the unmonitored zone.
    PlantCactus,
    /// Half-room monitoring with cacti in both zones and novel flora in the
    /// unmonitored zone.
    BotanicalGarden,
    /// Degenerate monitor: single state, single action, reward always
    /// observed, zero monitor reward.
    AlwaysOn,
}

impl MonitorVariant {
    pub fn id(self) -> &'static str {
        match self {
            MonitorVariant::Binary => "binary",
            MonitorVariant::HalfRoom => "half-room",
            MonitorVariant::PlantCactus => "plant-cactus",
            MonitorVariant::BotanicalGarden => "botanical-garden",
            MonitorVariant::AlwaysOn => "always-on",
        }
    }

    pub fn from_id(id: &str) -> Option<MonitorVariant> {
        match id {
            "binary" => Some(MonitorVariant::Binary),
            "half-room" => Some(MonitorVariant::HalfRoom),
            "plant-cactus" => Some(MonitorVariant::PlantCactus),
            "botanical-garden" => Some(MonitorVariant::BotanicalGarden),
            "always-on" => Some(MonitorVariant::AlwaysOn),
            _ => None,
        }
    }

    /// Spatial variants derive the monitor state from the agent position.
    pub fn is_spatial(self) -> bool {
        matches!(
            self,
            MonitorVariant::HalfRoom | MonitorVariant::PlantCactus | MonitorVariant::BotanicalGarden
        )
    }

    pub fn mon_action_count(self) -> usize {
        match self {
            MonitorVariant::Binary => 2,
            _ => 1,
        }
    }

    pub fn monitor_state_count(self) -> usize {
        if self.is_spatial() {
            2
        } else {
            1
        }
    }

    /// Flora composition for a scale of `n` plants per zone per kind.
    pub fn flora_counts(self, n: usize) -> FloraCounts {
        match self {
            MonitorVariant::Binary | MonitorVariant::AlwaysOn => {
                FloraCounts { plants: [n, n], cacti: [0, 0], novel: [0, 0], zoned: false }
            }
            MonitorVariant::HalfRoom => {
                FloraCounts { plants: [n, n], cacti: [0, 0], novel: [0, 0], zoned: true }
            }
            MonitorVariant::PlantCactus => {
                FloraCounts { plants: [n, n], cacti: [0, n], novel: [0, 0], zoned: true }
            }
            MonitorVariant::BotanicalGarden => {
                FloraCounts { plants: [n, n], cacti: [n, n], novel: [0, n], zoned: true }
            }
        }
    }

    /// Monitor state at episode start, given the agent's initial zone.
    pub fn initial_mon_state(self, agent_zone: u8) -> MonState {
        if self.is_spatial() {
            u8::from(agent_zone == 1)
        } else {
            0
        }
    }
}

/// Applies the monitor for one step.
///
/// `mon_now` is the monitor state the step was taken in; for spatial
/// variants the proxy depends on it (the agent's position before moving),
/// and the next monitor state tracks the zone the agent moved into.
pub fn monitor_step(
    variant: MonitorVariant,
    mon_now: MonState,
    agent_zone_next: u8,
    mon_action: usize,
    r_env: f64,
) -> (ProxyReward, f64, MonState) {
    match variant {
        MonitorVariant::Binary => {
            if mon_action == MON_ASK {
                (ProxyReward::Observed(r_env), ASK_COST, 0)
            } else {
                (ProxyReward::Unobservable, 0.0, 0)
            }
        }
        MonitorVariant::AlwaysOn => (ProxyReward::Observed(r_env), 0.0, 0),
        _ => {
            let proxy = if mon_now == 1 {
                ProxyReward::Observed(r_env)
            } else {
                ProxyReward::Unobservable
            };
            (proxy, 0.0, u8::from(agent_zone_next == 1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_ask_reveals_and_charges() {
        let (proxy, r_mon, mon) = monitor_step(MonitorVariant::Binary, 0, 2, MON_ASK, 0.7);
        assert_eq!(proxy, ProxyReward::Observed(0.7));
        assert_eq!(r_mon, -0.2);
        assert_eq!(mon, 0);
    }

    #[test]
    fn binary_not_ask_hides_for_free() {
        let (proxy, r_mon, _) = monitor_step(MonitorVariant::Binary, 0, 1, MON_NOT_ASK, -1.0);
        assert_eq!(proxy, ProxyReward::Unobservable);
        assert_eq!(r_mon, 0.0);
    }

    #[test]
    fn spatial_proxy_follows_the_pre_move_zone() {
        // Acting in zone 1 (on) while moving into zone 2: still observed.
        let (proxy, r_mon, next) = monitor_step(MonitorVariant::HalfRoom, 1, 2, 0, 1.0);
        assert_eq!(proxy, ProxyReward::Observed(1.0));
        assert_eq!(r_mon, 0.0);
        assert_eq!(next, 0);
        // Acting in zone 2 (off) while moving into zone 1: unobserved.
        let (proxy, _, next) = monitor_step(MonitorVariant::PlantCactus, 0, 1, 0, 1.0);
        assert_eq!(proxy, ProxyReward::Unobservable);
        assert_eq!(next, 1);
    }

    #[test]
    fn action_space_sizes() {
        assert_eq!(MonitorVariant::Binary.mon_action_count(), 2);
        assert_eq!(MonitorVariant::Binary.monitor_state_count(), 1);
        assert_eq!(MonitorVariant::HalfRoom.mon_action_count(), 1);
        assert_eq!(MonitorVariant::HalfRoom.monitor_state_count(), 2);
        assert_eq!(MonitorVariant::AlwaysOn.mon_action_count(), 1);
        assert_eq!(MonitorVariant::AlwaysOn.monitor_state_count(), 1);
    }
}
