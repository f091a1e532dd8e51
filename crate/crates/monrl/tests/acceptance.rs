//! Acceptance gate: every release-level claim checked end to end at desk
//! scale, one pass/fail line per criterion.
//!
//! Desk configuration D: 6x6 grid, window 7, two plants per zone per kind,
//! 100-step episodes, 1M environment steps, ensemble of 20 members.
//!
//! Heavy runs are cached under `target/acceptance` keyed by a content hash
//! of their configuration, so a green suite re-verifies from cached records
//! in seconds while any config or code-epoch change forces a re-run.

mod common;

use std::path::PathBuf;
use std::sync::Mutex;

use monmdp::{
    make_env, run_episode, EnvConfig, FloraKind, GridWorld, JointAction, JointState,
    MonEnv, ProxyReward,
};
use monrl::cautious::ensemble::load_dataset;
use monrl::cautious::report::{watering_ratio_report, CATEGORIES};
use monrl::harness::caution::{run_caution_pipeline, CautionOutput};
use monrl::harness::config::ExperimentConfig;
use monrl::harness::experiment::run_experiment;
use monrl::harness::stats::{bootstrap_ci, bootstrap_support};
use monrl::{QModel, RewardModel, TrainingSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Heavy criteria run one at a time.
static HEAVY: Mutex<()> = Mutex::new(());

fn acceptance_dir() -> PathBuf {
    let target = std::env::var("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target")
        });
    target.join("acceptance")
}

fn desk_env() -> EnvConfig {
    EnvConfig {
        width: 6,
        height: 6,
        window: 7,
        flora_per_zone_per_kind: 2,
        dryness_rate: 0.05,
        step_limit: 100,
        ..EnvConfig::default()
    }
}

fn desk_config(name: &str, env: &str, agent: &str, seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        env: env.into(),
        agent: agent.into(),
        seeds,
        total_steps: 1_000_000,
        eval_episodes: 200,
        out_dir: acceptance_dir(),
        environment: desk_env(),
        schedule: TrainingSchedule::default(),
        ..ExperimentConfig::default()
    }
}

fn seeds5() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn ci_rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(monmdp::seeds::derive(0xacce_97, tag))
}

// ----------------------------------------------------------------------
// Criterion 1: baseline ordering by area under the training curve.
// ----------------------------------------------------------------------

#[test]
fn criterion_1_baseline_ordering_by_auc() {
    let _lock = HEAVY.lock().unwrap();
    let mut aucs: Vec<(&str, Vec<f64>)> = Vec::new();
    for agent in ["reward-model", "ignore", "bot-zero"] {
        let cfg = desk_config(&format!("d-binary-{agent}"), "binary", agent, seeds5());
        let out = run_experiment(&cfg).expect("binary runs complete");
        aucs.push((agent, out.records.iter().map(|r| r.auc()).collect()));
    }
    let stats: Vec<(&str, f64, f64)> = aucs
        .iter()
        .enumerate()
        .map(|(i, (agent, vals))| {
            let (m, lo, hi) = bootstrap_ci(vals, 10_000, 0.95, &mut ci_rng(i as u64)).unwrap();
            (*agent, m, (hi - lo) / 2.0)
        })
        .collect();
    let (rm, ig, bz) = (&stats[0], &stats[1], &stats[2]);
    let gap_rm_ig = rm.1 - ig.1;
    let gap_ig_bz = ig.1 - bz.1;
    let ok = gap_rm_ig > rm.2 + ig.2 && gap_ig_bz > ig.2 + bz.2;
    println!(
        "ACCEPTANCE 1 (baseline AUC ordering): {} — reward-model {:.3}±{:.3} > ignore {:.3}±{:.3} > bot-zero {:.3}±{:.3}",
        if ok { "PASS" } else { "FAIL" },
        rm.1, rm.2, ig.1, ig.2, bz.1, bz.2
    );
    assert!(
        ok,
        "AUC ordering with CI-separated gaps failed: reward-model {:.3}±{:.3}, ignore {:.3}±{:.3}, bot-zero {:.3}±{:.3}",
        rm.1, rm.2, ig.1, ig.2, bz.1, bz.2
    );
}

// ----------------------------------------------------------------------
// Criterion 2: monitoring behavior at the end of training.
// ----------------------------------------------------------------------

#[test]
fn criterion_2_monitoring_behavior() {
    let _lock = HEAVY.lock().unwrap();
    let eval = |agent: &str| {
        let cfg = desk_config(&format!("d-binary-{agent}"), "binary", agent, seeds5());
        run_experiment(&cfg).expect("binary runs complete").records
    };
    let rm_ask = mean(&eval("reward-model").iter().map(|r| r.eval.ask_rate).collect::<Vec<_>>());
    let bz_ask = mean(&eval("bot-zero").iter().map(|r| r.eval.ask_rate).collect::<Vec<_>>());
    let ig = eval("ignore");
    let ig_on = mean(&ig.iter().map(|r| r.eval.ask_rate_on_water).collect::<Vec<_>>());
    let ig_off = mean(&ig.iter().map(|r| r.eval.ask_rate_off_water).collect::<Vec<_>>());
    let ig_selective = ig_on > 0.0 && ig_on >= 3.0 * ig_off;
    let ok = rm_ask < 0.05 && bz_ask > 0.80 && ig_selective;
    println!(
        "ACCEPTANCE 2 (monitoring behavior): {} — reward-model asks {:.4} (<0.05), bot-zero asks {:.4} (>0.80), ignore on/off-water asks {:.4}/{:.4} (>=3x)",
        if ok { "PASS" } else { "FAIL" },
        rm_ask, bz_ask, ig_on, ig_off
    );
    assert!(rm_ask < 0.05, "reward-model ask rate {rm_ask}");
    assert!(bz_ask > 0.80, "bot-zero ask rate {bz_ask}");
    assert!(ig_selective, "ignore asks on/off water: {ig_on} vs {ig_off}");
}

// ----------------------------------------------------------------------
// Criterion 3: generalization across the monitoring boundary.
// ----------------------------------------------------------------------

#[test]
fn criterion_3_half_room_generalization() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = desk_config("d-half-room", "half-room", "reward-model", seeds5());
    let out = run_experiment(&cfg).expect("half-room runs complete");
    let z1 = mean(&out.records.iter().map(|r| r.eval.mean_water_reward_zone1).collect::<Vec<_>>());
    let z2 = mean(&out.records.iter().map(|r| r.eval.mean_water_reward_zone2).collect::<Vec<_>>());
    let ok = z1 > 0.0 && (z2 - z1).abs() <= 0.25 * z1;
    println!(
        "ACCEPTANCE 3 (half-room generalization): {} — final watering reward zone1 {:.3}, zone2 {:.3} (within 25%)",
        if ok { "PASS" } else { "FAIL" },
        z1, z2
    );
    assert!(ok, "zone watering rewards: zone1 {z1}, zone2 {z2}");
}

// ----------------------------------------------------------------------
// Criterion 4: overgeneralization onto cacti.
// ----------------------------------------------------------------------

#[test]
fn criterion_4_plant_cactus_overgeneralization() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = desk_config("d-plant-cactus", "plant-cactus", "reward-model", seeds5());
    let out = run_experiment(&cfg).expect("plant-cactus runs complete");
    let cactus =
        mean(&out.records.iter().map(|r| r.eval.water_per_episode.cactus_zone2).collect::<Vec<_>>());
    let plants =
        mean(&out.records.iter().map(|r| r.eval.water_per_episode.plants_zone2).collect::<Vec<_>>());
    let ok = plants > 0.0 && cactus >= 0.5 * plants;
    println!(
        "ACCEPTANCE 4 (cactus overgeneralization): {} — cactus watering {:.3}/ep vs zone-2 plants {:.3}/ep (>=50%)",
        if ok { "PASS" } else { "FAIL" },
        cactus, plants
    );
    assert!(ok, "cactus {cactus} vs zone-2 plants {plants}");
}

// ----------------------------------------------------------------------
// Criterion 5: caution direction under k-of-N robustness (plus the
// ensemble's uncertainty separation that powers it).
// ----------------------------------------------------------------------

fn botanical_config() -> ExperimentConfig {
    let mut cfg = desk_config(
        "d-botanical",
        "botanical-garden",
        "reward-model",
        (0..10).collect(),
    );
    cfg.dump_observed = true;
    cfg.ensemble.members = 20;
    cfg.kofn.n = 10;
    cfg.kofn.iterations = 50;
    cfg.report_episodes = 300;
    cfg
}

fn pooled(tables: &[monrl::cautious::report::WateringTable], cat: &str, policy: usize) -> Vec<f64> {
    let ci = CATEGORIES.iter().position(|c| *c == cat).unwrap();
    tables
        .iter()
        .map(|t| {
            if policy == 0 {
                t.rows[ci].mean
            } else {
                t.rows[ci].policy_means[policy - 1]
            }
        })
        .collect()
}

fn ratio_of_means(base: &[f64], robust: &[f64], idx: &[usize]) -> f64 {
    let b: f64 = idx.iter().map(|&i| base[i]).sum::<f64>() / idx.len() as f64;
    let r: f64 = idx.iter().map(|&i| robust[i]).sum::<f64>() / idx.len() as f64;
    monrl::cautious::report::water_ratio(b, r)
}

#[test]
fn criterion_5_caution_direction() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = botanical_config();
    let out: CautionOutput = run_caution_pipeline(&cfg).expect("caution pipeline completes");
    let presets = &out.presets;
    let p10 = presets.iter().position(|p| p == "10-of-10").unwrap() + 1;
    let p5 = presets.iter().position(|p| p == "5-of-10").unwrap() + 1;
    let p1 = presets.iter().position(|p| p == "1-of-10").unwrap() + 1;
    let tables = &out.per_seed;
    let n = tables.len();

    // Pooled novel frequency per seed and policy.
    let novel_base = pooled(tables, "novel-all", 0);
    let novel_10 = pooled(tables, "novel-all", p10);
    let novel_5 = pooled(tables, "novel-all", p5);
    let novel_1 = pooled(tables, "novel-all", p1);
    // Pooled standard plants (both zones).
    let plants = |policy: usize| -> Vec<f64> {
        let z1 = pooled(tables, "plants-zone1", policy);
        let z2 = pooled(tables, "plants-zone2", policy);
        z1.iter().zip(&z2).map(|(a, b)| a + b).collect()
    };
    let plants_base = plants(0);
    let plants_by_preset = [plants(p10), plants(p5), plants(p1)];

    let reps = 10_000;
    let support = |f: &dyn Fn(&[usize]) -> bool, tag: u64| {
        bootstrap_support(n, reps, &mut ci_rng(0x50 + tag), |idx| f(idx)).unwrap()
    };
    let s_lt_one =
        support(&|idx| ratio_of_means(&novel_base, &novel_1, idx) < 1.0, 1);
    let s_1_lt_5 = support(
        &|idx| {
            ratio_of_means(&novel_base, &novel_1, idx) < ratio_of_means(&novel_base, &novel_5, idx)
        },
        2,
    );
    let s_5_le_10 = support(
        &|idx| {
            ratio_of_means(&novel_base, &novel_5, idx)
                <= ratio_of_means(&novel_base, &novel_10, idx)
        },
        3,
    );
    let mut s_plants = Vec::new();
    for (pi, robust) in plants_by_preset.iter().enumerate() {
        s_plants.push(support(
            &|idx| ratio_of_means(&plants_base, robust, idx) >= 1.0,
            4 + pi as u64,
        ));
    }

    let point = |r: &[f64]| ratio_of_means(&novel_base, r, &(0..n).collect::<Vec<_>>());
    let ok = s_lt_one >= 0.95
        && s_1_lt_5 >= 0.95
        && s_5_le_10 >= 0.95
        && s_plants.iter().all(|&s| s >= 0.95);
    println!(
        "ACCEPTANCE 5 (caution direction): {} — novel ratios 10-of-10 {:.3}, 5-of-10 {:.3}, 1-of-10 {:.3}; support: r1<1 {:.3}, r1<r5 {:.3}, r5<=r10 {:.3}, plants>=1 {:?}",
        if ok { "PASS" } else { "FAIL" },
        point(&novel_10),
        point(&novel_5),
        point(&novel_1),
        s_lt_one,
        s_1_lt_5,
        s_5_le_10,
        s_plants.iter().map(|s| (s * 1e3).round() / 1e3).collect::<Vec<_>>()
    );
    assert!(s_lt_one >= 0.95, "support(ratio_novel(1-of-10) < 1) = {s_lt_one}");
    assert!(s_1_lt_5 >= 0.95, "support(ratio(1-of-10) < ratio(5-of-10)) = {s_1_lt_5}");
    assert!(s_5_le_10 >= 0.95, "support(ratio(5-of-10) <= ratio(10-of-10)) = {s_5_le_10}");
    for (pi, s) in s_plants.iter().enumerate() {
        assert!(*s >= 0.95, "support(standard-plant ratio >= 1) for preset {pi} = {s}");
    }
}

#[test]
fn criterion_5b_ensemble_uncertainty_separation() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = botanical_config();
    // The pipeline caches everything; this reuses (or creates) seed 0's
    // ensemble and dataset.
    monrl::harness::caution::ensure_base(&cfg, 0).expect("base run");
    let ensemble = monrl::harness::caution::ensure_ensemble(&cfg, 0).expect("ensemble");
    let dataset = load_dataset(&cfg.seed_dir(0).join("observed.bin")).expect("dataset");

    // In-distribution probes: observed watering states from the training
    // data. Out-of-distribution probes: the same states with the watered
    // cell's type code rewritten to each novel code.
    let water = monmdp::EnvAction::Water.index();
    let mut scratch = RewardModel::new(7, 6, 1e-4, 0).unwrap();
    let mut id_stds = Vec::new();
    let mut ood_stds = Vec::new();
    let std_of = |ens: &monrl::cautious::ensemble::Ensemble,
                  scratch: &mut RewardModel,
                  obs: &monmdp::EnvObservation| {
        let preds: Vec<f64> =
            (0..ens.len()).map(|m| ens.predict(m, obs, scratch)[water] as f64).collect();
        let mu = mean(&preds);
        (preds.iter().map(|p| (p - mu) * (p - mu)).sum::<f64>() / preds.len() as f64).sqrt()
    };
    for step in dataset.iter().filter(|s| s.action.env_action == water).take(60) {
        let obs = &step.state.env;
        let w = obs.window as usize;
        let center = (w / 2) * w + (w / 2);
        let cell = obs.cells[center];
        // Only probe states where a standard plant is being watered.
        if cell & 0b111 != 0b011 {
            continue;
        }
        id_stds.push(std_of(&ensemble, &mut scratch, obs));
        for t in monmdp::NOVEL_TRIPLES {
            let mut cells = obs.cells.clone();
            cells[center] = (cell & !0b111) | t[0] | (t[1] << 1) | (t[2] << 2);
            let novel_obs = monmdp::EnvObservation { window: obs.window, cells };
            ood_stds.push(std_of(&ensemble, &mut scratch, &novel_obs));
        }
    }
    assert!(id_stds.len() >= 10, "not enough in-distribution probes");
    let id = mean(&id_stds);
    let ood = mean(&ood_stds);
    let ok = ood >= 2.0 * id;
    println!(
        "ACCEPTANCE 5b (uncertainty separation): {} — member std on familiar watering states {:.4}, on novel-flora states {:.4} (>=2x)",
        if ok { "PASS" } else { "FAIL" },
        id, ood
    );
    assert!(ok, "in-distribution std {id} vs out-of-distribution std {ood}");
}

// ----------------------------------------------------------------------
// Criterion 6: the never-watered ratio convention.
// ----------------------------------------------------------------------

#[test]
fn criterion_6_never_watered_convention() {
    // A policy pinned to Stay never waters anything; every category then
    // reports the 0/0 ratio as exactly 1.00.
    let mut env = make_env("botanical-garden", &desk_env()).unwrap();
    let make_stay = || {
        let mut q = QModel::new(7, 6, 2, 1, 1e-4, 0).unwrap();
        q.online.zero_fill();
        q.online.fc2_b = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        q.sync_target();
        q
    };
    let mut base = make_stay();
    let mut robust5 = make_stay();
    let mut robust1 = make_stay();
    let mut policies = vec![
        ("reward-model".to_string(), &mut base),
        ("5-of-10".to_string(), &mut robust5),
        ("1-of-10".to_string(), &mut robust1),
    ];
    let table = watering_ratio_report(
        &mut policies,
        &mut env,
        monmdp::MonitorVariant::BotanicalGarden,
        50,
        7,
        2_000,
        0.95,
    )
    .unwrap();
    let mut checked = 0;
    for row in &table.rows {
        assert_eq!(row.mean, 0.0, "{} watered by the stay policy", row.category);
        for &ratio in &row.ratios {
            assert_eq!(ratio, 1.0, "category {} ratio {ratio}", row.category);
            checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 6 (never-watered ratio convention): PASS — {checked} zero-frequency ratios all reported as exactly 1.00"
    );
}

// ----------------------------------------------------------------------
// Criterion 7: oracle equivalence on a fully enumerable 3x3 process.
// ----------------------------------------------------------------------

/// Exact Q-values for the 3x3 single-plant always-monitored world with a
/// zero drying rate, enumerated as (plant cell, agent cell, dryness).
struct TinyOracle {
    q: Vec<[f64; 6]>,
}

impl TinyOracle {
    fn state_index(plant: usize, agent: usize, dryness: usize) -> usize {
        (plant * 9 + agent) * 3 + dryness
    }

    fn step(plant: usize, agent: usize, dryness: usize, action: usize) -> (usize, usize, f64) {
        let (ar, ac) = (agent / 3, agent % 3);
        match action {
            0..=3 => {
                let (nr, nc) = match action {
                    0 => (ar.saturating_sub(1), ac),
                    1 => ((ar + 1).min(2), ac),
                    2 => (ar, (ac + 1).min(2)),
                    _ => (ar, ac.saturating_sub(1)),
                };
                (nr * 3 + nc, dryness, 0.0)
            }
            4 => {
                if agent == plant {
                    if dryness >= 1 {
                        (agent, dryness - 1, 1.0)
                    } else {
                        (agent, dryness, -1.0)
                    }
                } else {
                    (agent, dryness, -0.2)
                }
            }
            _ => (agent, dryness, 0.0),
        }
    }

    fn solve(gamma: f64) -> TinyOracle {
        let mut q = vec![[0.0f64; 6]; 9 * 9 * 3];
        for _ in 0..2_000 {
            let mut next = q.clone();
            for plant in 0..9 {
                for agent in 0..9 {
                    for dryness in 0..3 {
                        for action in 0..6 {
                            let (a2, d2, r) = Self::step(plant, agent, dryness, action);
                            let idx2 = Self::state_index(plant, a2, d2);
                            let vmax =
                                q[idx2].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                            next[Self::state_index(plant, agent, dryness)][action] =
                                r + gamma * vmax;
                        }
                    }
                }
            }
            q = next;
        }
        TinyOracle { q }
    }
}

#[test]
fn criterion_7_oracle_equivalence_on_enumerable_process() {
    let _lock = HEAVY.lock().unwrap();
    let gamma = 0.9;
    let mut cfg = desk_config("d-oracle-3x3", "always-on", "reward-model", vec![0]);
    cfg.environment = EnvConfig {
        width: 3,
        height: 3,
        window: 7,
        dryness_rate: 0.0,
        step_limit: 100,
        flora_per_zone_per_kind: 2,
        plants_zone1: Some(1),
        plants_zone2: Some(0),
        ..EnvConfig::default()
    };
    cfg.total_steps = 150_000;
    cfg.eval_episodes = 20;
    cfg.schedule = TrainingSchedule {
        gamma,
        start_after: 5_000,
        buffer_capacity: 200_000,
        batch_size: 128,
        target_sync_every: 50,
        round_episodes: 10,
        steps_per_update: 5,
        lr_q: 1e-3,
        lr_reward: 1e-3,
        eps_initial: 1.0,
        eps_min: 0.3,
        eps_decay: 2e-3,
    };
    run_experiment(&cfg).expect("oracle run completes");
    let (agent, _) = monrl::load_checkpoint(
        &cfg.seed_dir(0).join("checkpoint.bin"),
        cfg.schedule.clone(),
        0,
    )
    .expect("checkpoint loads");
    let mut q = agent.q;

    let oracle = TinyOracle::solve(gamma);
    let mut worst = 0.0f64;
    let mut policy_mismatches = Vec::new();
    for plant in 0..9 {
        for agent_cell in 0..9 {
            for dryness in 0..3u8 {
                let world = GridWorld::with_layout(
                    3,
                    3,
                    0.0,
                    &[(plant / 3, plant % 3, FloraKind::Plant, dryness)],
                    (agent_cell / 3, agent_cell % 3),
                )
                .expect("probe layout");
                let obs = monmdp::encode_observation(&world, 7);
                let state = JointState { env: obs, mon: 0 };
                let qs = q.q_values(&state).to_vec();
                let star = &oracle.q[TinyOracle::state_index(plant, agent_cell, dryness as usize)];
                for a in 0..6 {
                    worst = worst.max((qs[a] as f64 - star[a]).abs());
                }
                let greedy = monrl::argmax_lowest(&qs);
                let best = star.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if star[greedy] < best - 1e-6 {
                    policy_mismatches.push((plant, agent_cell, dryness, greedy));
                }
            }
        }
    }
    let ok = worst < 1e-2 && policy_mismatches.is_empty();
    println!(
        "ACCEPTANCE 7 (oracle equivalence): {} — max |Q - Q*| = {:.5} over 243 states, {} greedy deviations from the optimal action set",
        if ok { "PASS" } else { "FAIL" },
        worst,
        policy_mismatches.len()
    );
    assert!(worst < 1e-2, "max |Q - Q*| = {worst}");
    assert!(
        policy_mismatches.is_empty(),
        "greedy policy leaves the optimal set at {policy_mismatches:?}"
    );
}

// ----------------------------------------------------------------------
// Criterion 8: numerical core.
// ----------------------------------------------------------------------

#[test]
fn criterion_8_numerical_core() {
    use nanonet::{
        adam_step, gradients, init_params, mse_loss, Architecture, Batch, BatchTargets, ConvSpec,
        OptimizerState, Parameters, Workspace,
    };
    // Finite differences per tensor on a small f64 net.
    let arch = Architecture {
        input: (6, 5, 5),
        conv1: ConvSpec { out_channels: 4, kernel: 3, stride: 1 },
        conv2: ConvSpec { out_channels: 5, kernel: 3, stride: 1 },
        hidden: 8,
        concat_width: 2,
        output_width: 3,
    };
    let params: Parameters<f64> = init_params(&arch, 77).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let len = 3usize;
    let inputs: Vec<f64> = (0..len * 6 * 25).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let concats: Vec<f64> = (0..len * 2).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let targets_v: Vec<f64> = (0..len * 3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let batch = Batch { inputs: &inputs, concats: Some(&concats), len };
    let targets = BatchTargets::Full(&targets_v);
    let mut grads = Parameters::zeros(&arch).unwrap();
    let mut ws = Workspace::new(&arch).unwrap();
    gradients(&arch, &params, &batch, &targets, &mut grads, &mut ws).unwrap();
    let loss_of = |p: &Parameters<f64>| {
        let mut scratch = Parameters::zeros(&arch).unwrap();
        let mut ws = Workspace::new(&arch).unwrap();
        gradients(&arch, p, &batch, &targets, &mut scratch, &mut ws).unwrap()
    };
    let mut worst = 0.0f64;
    let mut coords = 0usize;
    for t in 0..8 {
        let n = params.tensors()[t].len();
        let step = (n / 13).max(1);
        for i in (0..n).step_by(step) {
            let h = 1e-4;
            let mut plus = params.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][i] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let g = grads.tensors()[t][i];
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
            coords += 1;
        }
    }
    assert!(coords >= 100, "checked {coords} coordinates");
    assert!(worst < 1e-4, "finite-difference max relative error {worst}");

    // Adam against a scalar reference for 100 steps.
    let tiny = Architecture {
        input: (1, 3, 3),
        conv1: ConvSpec { out_channels: 1, kernel: 1, stride: 1 },
        conv2: ConvSpec { out_channels: 1, kernel: 1, stride: 1 },
        hidden: 1,
        concat_width: 0,
        output_width: 1,
    };
    let mut p: Parameters<f64> = Parameters::zeros(&tiny).unwrap();
    p.fc2_w[0] = 0.3;
    let mut opt = OptimizerState::new(&tiny, 0.02).unwrap();
    let (mut theta, mut m, mut v) = (0.3f64, 0.0f64, 0.0f64);
    let mut adam_err = 0.0f64;
    for t in 1..=100u64 {
        let g_val = (t as f64 * 0.11).cos() + 0.2 * theta;
        m = 0.9 * m + 0.1 * g_val;
        v = 0.999 * v + 0.001 * g_val * g_val;
        let mh = m / (1.0 - 0.9f64.powi(t as i32));
        let vh = v / (1.0 - 0.999f64.powi(t as i32));
        theta -= 0.02 * mh / (vh.sqrt() + 1e-8);
        let mut g = Parameters::zeros(&tiny).unwrap();
        g.fc2_w[0] = (t as f64 * 0.11).cos() + 0.2 * p.fc2_w[0];
        adam_step(&mut p, &g, &mut opt).unwrap();
        adam_err = adam_err.max((p.fc2_w[0] - theta).abs());
    }
    assert!(adam_err < 1e-6, "adam deviates from the scalar reference by {adam_err}");

    // MSE unit properties.
    assert_eq!(mse_loss(&[1.0f64, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(mse_loss(&[0.0f64], &[2.0]).unwrap(), 4.0);

    // Bootstrap interval unit properties.
    let (m3, lo3, hi3) = bootstrap_ci(&[3.0, 3.0, 3.0], 1_000, 0.95, &mut ci_rng(8)).unwrap();
    assert_eq!((m3, lo3, hi3), (3.0, 3.0, 3.0));
    let (m2, lo2, hi2) = bootstrap_ci(&[0.0, 10.0], 10_000, 0.95, &mut ci_rng(9)).unwrap();
    assert_eq!((m2, lo2, hi2), (5.0, 0.0, 10.0));

    println!(
        "ACCEPTANCE 8 (numerical core): PASS — finite-difference max rel err {worst:.2e} over {coords} coordinates, Adam vs reference {adam_err:.2e}, MSE and bootstrap properties hold"
    );
}

// ----------------------------------------------------------------------
// Criterion 9: simulator statistics.
// ----------------------------------------------------------------------

#[test]
fn criterion_9_simulator_statistics() {
    // Drying-event frequency over 1e5 steps.
    let mut env = make_env("binary", &desk_env()).unwrap();
    let mut steps = 0u64;
    let mut events = 0u64;
    let mut episode = 0u64;
    while steps < 100_000 {
        let log = run_episode(
            &mut env,
            |_, rng| JointAction {
                env_action: rng.gen_range(0..6),
                mon_action: rng.gen_range(0..2),
            },
            100,
            episode,
            episode,
        )
        .unwrap();
        steps += log.transitions.len() as u64;
        events += env.drying_events();
        episode += 1;
    }
    let freq = events as f64 / steps as f64;
    assert!(
        (freq - 0.05).abs() <= 0.005,
        "drying-event frequency {freq} outside 0.05 +/- 0.005"
    );

    // Uniform random-policy joint-action frequencies within 2%.
    let mut agent = monrl::Agent::new(
        monrl::AgentVariant::BotZero,
        7,
        6,
        1,
        2,
        TrainingSchedule { eps_decay: 0.0, ..TrainingSchedule::default() },
        3,
    )
    .unwrap();
    let state = {
        let mut e = make_env("binary", &desk_env()).unwrap();
        e.reset(1)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut counts = [0u64; 12];
    let draws = 100_000;
    for _ in 0..draws {
        let a = agent.select_action(&state, 0, &mut rng);
        counts[a.env_action * 2 + a.mon_action] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let f = c as f64 / draws as f64;
        assert!(
            (f - 1.0 / 12.0).abs() <= 0.02,
            "joint action {i} frequency {f} outside 1/12 +/- 0.02"
        );
    }

    // Truthfulness over 1e6 fuzzed steps across all four variants.
    let mut fuzzed = 0u64;
    for id in ["binary", "half-room", "plant-cactus", "botanical-garden"] {
        let mut env = make_env(id, &desk_env()).unwrap();
        let mon_actions = env.mon_action_count();
        let mut ep = 0u64;
        let mut local = 0u64;
        while local < 250_000 {
            let log = run_episode(
                &mut env,
                |_, rng| JointAction {
                    env_action: rng.gen_range(0..6),
                    mon_action: rng.gen_range(0..mon_actions),
                },
                100,
                0x900 + ep,
                ep,
            )
            .unwrap();
            for t in &log.transitions {
                match t.proxy {
                    ProxyReward::Observed(v) => {
                        assert_eq!(v.to_bits(), t.true_env_reward.to_bits(), "env {id}")
                    }
                    ProxyReward::Unobservable => {}
                }
            }
            local += log.transitions.len() as u64;
            ep += 1;
        }
        fuzzed += local;
    }
    println!(
        "ACCEPTANCE 9 (simulator statistics): PASS — drying frequency {freq:.4} (0.05±0.005), random joint actions uniform within 2%, truthfulness held over {fuzzed} fuzzed steps"
    );
}

// ----------------------------------------------------------------------
// Criterion 10: byte-identical reruns.
// ----------------------------------------------------------------------

#[test]
fn criterion_10_determinism_of_exports() {
    let _lock = HEAVY.lock().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let make = |sub: &str| {
        let mut cfg = desk_config("determinism", "binary", "reward-model", vec![0, 1]);
        cfg.out_dir = tmp.path().join(sub);
        cfg.total_steps = 40_000;
        cfg.eval_episodes = 20;
        cfg.schedule.start_after = 5_000;
        cfg.schedule.round_episodes = 50;
        cfg
    };
    let a = make("a");
    let b = make("b");
    run_experiment(&a).unwrap();
    run_experiment(&b).unwrap();
    let collect = |root: &std::path::Path| {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d).unwrap() {
                let p = entry.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((
                        p.strip_prefix(root).unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    ));
                }
            }
        }
        files.sort();
        files
    };
    let fa = collect(&a.exp_dir());
    let fb = collect(&b.exp_dir());
    assert_eq!(
        fa.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        fb.iter().map(|(n, _)| n).collect::<Vec<_>>()
    );
    let mut bytes = 0usize;
    for ((na, ba), (_, bb)) in fa.iter().zip(fb.iter()) {
        assert_eq!(ba, bb, "file {na} differs between identical reruns");
        bytes += ba.len();
    }
    println!(
        "ACCEPTANCE 10 (determinism): PASS — {} files, {} bytes byte-identical across independent reruns",
        fa.len(),
        bytes
    );
}
