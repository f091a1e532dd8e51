//! Command-line front end: training runs, ensembles, k-of-N optimization,
//! report tables, plot-ready curve exports, and an ASCII renderer.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use monmdp::{make_env, render_ascii, run_episode, EnvConfig, JointAction, MonEnv};
use monrl::harness::caution::{ensure_ensemble, ensure_robust, load_base_policy, run_caution_pipeline};
use monrl::harness::config::ExperimentConfig;
use monrl::harness::experiment::{load_record, run_experiment, run_one_seed_opts};
use monrl::harness::export::{plot_data, write_csv_atomic};
use rand::Rng;

#[derive(Parser)]
#[command(
    name = "monrl",
    about = "Monitored-MDP experiments: train agents, fit reward-model ensembles, optimize cautious policies, and export tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured agent on every seed and write records/summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed list (comma separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Re-run even when cached results match the config hash.
        #[arg(long)]
        force: bool,
        /// Continue an interrupted run from its checkpoint (replay buffers
        /// restart empty; results can differ from an uninterrupted run).
        #[arg(long)]
        resume: bool,
    },
    /// Train the reward-model ensemble for each seed.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Run k-of-N robust optimization for a preset (e.g. 5-of-10).
    Kofn {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: String,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Produce the watering-frequency table across seeds and presets.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
    /// Export an x/y/lo/hi curve for a series key across seeds.
    PlotData {
        #[arg(long)]
        config: PathBuf,
        /// Series key: return, monitor-ask, epsilon, water:<cat>:<zone>,
        /// water:novel.
        #[arg(long)]
        key: String,
        /// Output CSV path (defaults into the experiment directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Step a random policy through one episode, printing the grid.
    Render {
        /// Environment id (binary, half-room, plant-cactus,
        /// botanical-garden, always-on).
        #[arg(long, default_value = "binary")]
        env: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Optional experiment config supplying the environment geometry.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the episode as one JSON transition per line.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
}

fn with_seeds(mut cfg: ExperimentConfig, seeds: Option<Vec<u64>>) -> Result<ExperimentConfig> {
    if let Some(seeds) = seeds {
        cfg.seeds = seeds;
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seeds, force, resume } => {
            let cfg = with_seeds(ExperimentConfig::load_toml(&config)?, seeds)?;
            if force || resume {
                for &seed in &cfg.seeds {
                    let rec = run_one_seed_opts(&cfg, seed, force, resume)?;
                    println!(
                        "seed {seed}: {} episodes, auc {:.3}, eval return {:.3}",
                        rec.episodes,
                        rec.auc(),
                        rec.eval.mean_return_true
                    );
                }
            }
            let out = run_experiment(&cfg)?;
            for row in &out.summary {
                println!("{:<28} {:>10.4} [{:.4}, {:.4}]", row.metric, row.mean, row.lo, row.hi);
            }
            println!("records and summary under {}", out.exp_dir.display());
            Ok(())
        }
        Command::Ensemble { config, seeds } => {
            let cfg = with_seeds(ExperimentConfig::load_toml(&config)?, seeds)?;
            for &seed in &cfg.seeds {
                let ens = ensure_ensemble(&cfg, seed)?;
                println!(
                    "seed {seed}: {} members, dataset {:016x}",
                    ens.len(),
                    ens.dataset_hash
                );
            }
            Ok(())
        }
        Command::Kofn { config, preset, seeds } => {
            let cfg = with_seeds(ExperimentConfig::load_toml(&config)?, seeds)?;
            if monrl::cautious::kofn::KofnConfig::preset(&preset).is_none() {
                bail!("unknown preset {preset} (known: 10-of-10, 5-of-10, 1-of-10)");
            }
            for &seed in &cfg.seeds {
                let ensemble = ensure_ensemble(&cfg, seed)?;
                let base = load_base_policy(&cfg, seed)?;
                ensure_robust(&cfg, seed, &preset, &base, &ensemble)?;
                println!("seed {seed}: {preset} policy ready");
            }
            Ok(())
        }
        Command::Report { config } => {
            let cfg = ExperimentConfig::load_toml(&config)?;
            let out = run_caution_pipeline(&cfg)?;
            println!(
                "{:<14} {:>8} {:>8} {:>8}  {}",
                "category",
                "mean",
                "lo",
                "hi",
                out.presets
                    .iter()
                    .map(|p| format!("ratio_{p}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            for row in &out.rows {
                let ratios = row
                    .ratio_mean
                    .iter()
                    .map(|r| format!("{r:>10.3}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                println!(
                    "{:<14} {:>8.3} {:>8.3} {:>8.3}  {ratios}",
                    row.category, row.mean, row.lo, row.hi
                );
            }
            println!("table under {}", cfg.exp_dir().join("watering_table.csv").display());
            Ok(())
        }
        Command::PlotData { config, key, out } => {
            let cfg = ExperimentConfig::load_toml(&config)?;
            let mut records = Vec::new();
            for &seed in &cfg.seeds {
                let dir = cfg.seed_dir(seed);
                records.push(load_record(&dir).with_context(|| {
                    format!("no cached record for seed {seed}; run `monrl train` first")
                })?);
            }
            let points = plot_data(
                &records,
                &key,
                cfg.ma_window,
                cfg.bootstrap_reps.min(2000),
                cfg.bootstrap_level,
                0x9_1a0,
            )?;
            let path = out.unwrap_or_else(|| {
                cfg.exp_dir().join(format!("curve_{}.csv", key.replace(':', "_")))
            });
            write_csv_atomic(&path, &points)?;
            println!("{} points -> {}", points.len(), path.display());
            Ok(())
        }
        Command::Render { env, seed, steps, config, jsonl } => {
            let env_cfg = match &config {
                Some(path) => ExperimentConfig::load_toml(path)?.environment,
                None => EnvConfig::default(),
            };
            let mut world = make_env(&env, &env_cfg)?;
            let mon_actions = world.mon_action_count();
            let log = run_episode(
                &mut world,
                |_, rng| JointAction {
                    env_action: rng.gen_range(0..6),
                    mon_action: rng.gen_range(0..mon_actions),
                },
                steps.max(1),
                seed,
                0,
            )?;
            // Re-run the same episode printing the grid as it evolves.
            let mut world2 = make_env(&env, &env_cfg)?;
            world2.reset(seed);
            println!("{}", render_ascii(world2.world().expect("reset populated the grid")));
            for t in &log.transitions {
                world2.step(t.action)?;
                println!(
                    "action (env {}, mon {}) proxy {:?} reward {} mon {}",
                    t.action.env_action, t.action.mon_action, t.proxy, t.true_env_reward, t.mon_reward
                );
                println!("{}", render_ascii(world2.world().expect("grid present")));
            }
            if let Some(path) = jsonl {
                let mut buf = Vec::new();
                log.write_jsonl(&mut buf)?;
                std::fs::write(&path, buf)?;
                println!("episode written to {}", path.display());
            }
            Ok(())
        }
    }
}
