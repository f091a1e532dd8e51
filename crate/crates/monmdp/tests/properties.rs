//! Property tests over random action sequences.

use monmdp::{make_env, EnvConfig, JointAction, MonEnv, ProxyReward};
use proptest::prelude::*;

fn apply_script(id: &str, seed: u64, script: &[(usize, usize)]) -> Vec<monmdp::Transition> {
    let mut env = make_env(id, &EnvConfig::desk()).unwrap();
    env.reset(seed);
    let mon_actions = env.mon_action_count();
    script
        .iter()
        .map(|&(e, m)| {
            env.step(JointAction { env_action: e % 6, mon_action: m % mon_actions }).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// (env id, seed, action sequence) fully determines the episode.
    #[test]
    fn episode_is_a_function_of_seed_and_actions(
        seed in 0u64..1_000,
        script in prop::collection::vec((0usize..6, 0usize..2), 1..100),
        variant_idx in 0usize..4,
    ) {
        let id = ["binary", "half-room", "plant-cactus", "botanical-garden"][variant_idx];
        let a = apply_script(id, seed, &script);
        let b = apply_script(id, seed, &script);
        prop_assert_eq!(a, b);
    }

    /// Total dryness moves by at most one level down (watering) and one
    /// level up (drying) per step, and the proxy stays truthful.
    #[test]
    fn dryness_conservation_and_truthfulness(
        seed in 0u64..1_000,
        script in prop::collection::vec((0usize..6, 0usize..2), 1..100),
    ) {
        let mut env = make_env("binary", &EnvConfig::desk()).unwrap();
        env.reset(seed);
        let mut dryness = env.world().unwrap().total_dryness() as i64;
        for &(e, m) in &script {
            let t = env.step(JointAction { env_action: e, mon_action: m }).unwrap();
            let now = env.world().unwrap().total_dryness() as i64;
            let delta = now - dryness;
            prop_assert!((-1..=1).contains(&delta), "dryness moved by {delta}");
            dryness = now;
            if let ProxyReward::Observed(v) = t.proxy {
                prop_assert_eq!(v, t.true_env_reward);
            }
        }
    }
}
