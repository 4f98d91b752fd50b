use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbirl::config::{Baselines, ConfigError, ExperimentConfig};
use cbirl::formats;
use cbirl::harness::{self, HarnessError, Prepared};
use cbirl_core::case_base::subsample;
use cbirl_core::protocol::scale_returns;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cbirl", version, about = "Case-based inverse reinforcement learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train an expert on the hidden reward and measure the scaling baselines.
    TrainExpert(Common),
    /// Record one greedy expert trajectory (states only).
    Record {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Keep every k-th state of each trajectory in a file.
    Subsample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run case-based learning and write the result tables and snapshots.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        case_base: Option<PathBuf>,
    },
    /// Greedy evaluation of a saved policy on the hidden reward.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
    },
    /// Run the hyperparameter variants and report the best.
    Sweep(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), HarnessError> {
    let cfg = ExperimentConfig::load(&common.config)?;
    let base = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    std::fs::create_dir_all(&common.out).map_err(|source| formats::FormatError::Io {
        path: common.out.clone(),
        source,
    })?;
    Ok((cfg, base))
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::TrainExpert(common) => {
            let (mut cfg, base) = load(&common)?;
            if let Some(seed) = common.seed {
                cfg.expert.train_seed = seed;
            }
            let world = cfg.env.build(&base)?;
            let expert = harness::train_expert(&world, &cfg.expert)?;
            let baselines = harness::measure_baselines(&expert, &world, &cfg.expert)?;
            formats::save_policy(&common.out.join("expert.policy"), &expert)?;
            let text = toml::to_string(&baselines).expect("baselines serialise");
            std::fs::write(common.out.join("baselines.toml"), text).map_err(|source| formats::FormatError::Io {
                path: common.out.join("baselines.toml"),
                source,
            })?;
            println!("random {} expert {}", baselines.random, baselines.expert);
        }
        Command::Record { common, policy } => {
            let (mut cfg, base) = load(&common)?;
            if let Some(seed) = common.seed {
                cfg.expert.record_seed = seed;
            }
            let world = cfg.env.build(&base)?;
            let expert = formats::load_policy(&policy, &world, &cfg.expert.agent)?;
            let (seed, trajectory) = harness::record_expert(&expert, &world, &cfg.expert)?;
            let path = common.out.join("expert_trajectory.txt");
            formats::save_trajectories(&path, &[trajectory])?;
            println!("recorded seed {seed} to {}", path.display());
        }
        Command::Subsample { input, k, out } => {
            if k == 0 {
                return Err(ConfigError::Invalid("--k must be >= 1".into()).into());
            }
            let kept = formats::load_trajectories(&input)?
                .iter()
                .map(|t| subsample(t, k))
                .collect::<Result<Vec<_>, _>>()?;
            let path = out.join("case_base.txt");
            formats::save_trajectories(&path, &kept)?;
            println!("wrote {}", path.display());
        }
        Command::Train { common, case_base } => {
            let (mut cfg, base) = load(&common)?;
            if let Some(seed) = common.seed {
                cfg.seeds = vec![seed];
            }
            if let Some(path) = case_base {
                cfg.case_base = Some(std::env::current_dir().unwrap_or_default().join(path));
            }
            let prepared = Prepared::from_config(&cfg, &base)?;
            let result = harness::run_cbirl(&cfg, &prepared)?;
            harness::write_results(&common.out.join("results.csv"), &result.reports)?;
            harness::write_returns(&common.out.join("returns.csv"), &cfg.seeds, &result.reports)?;
            for o in &result.seeds {
                formats::save_policy(&common.out.join(format!("seed-{}.policy", o.seed)), o.run.agent())?;
                formats::save_equality(
                    &common.out.join(format!("seed-{}.equality", o.seed)),
                    o.run.equality(),
                    &cfg.equality,
                )?;
            }
            if let Some(r) = result.final_report() {
                println!("step {} scaled q25 {} q50 {} q75 {}", r.step, r.q25, r.q50, r.q75);
            }
        }
        Command::Evaluate {
            common,
            policy,
            episodes,
        } => {
            let (cfg, base) = load(&common)?;
            if episodes == 0 {
                return Err(ConfigError::Invalid("--episodes must be >= 1".into()).into());
            }
            let mut world = cfg.env.build(&base)?;
            let agent = formats::load_policy(&policy, &world, &cfg.agent)?;
            let start = common.seed.unwrap_or(0);
            let seeds: Vec<u64> = (start..start + episodes as u64).collect();
            let returns = harness::evaluate(&mut harness::Greedy(&agent), &mut world, &seeds)?;
            for (seed, r) in seeds.iter().zip(&returns) {
                println!("{seed},{r}");
            }
            let mean = returns.iter().sum::<f64>() / returns.len() as f64;
            match cfg.baselines {
                Some(Baselines { random, expert }) => {
                    println!("mean {mean} scaled {}", scale_returns(&[mean], random, expert)?[0])
                }
                None => println!("mean {mean}"),
            }
        }
        Command::Sweep(common) => {
            let (cfg, base) = load(&common)?;
            let prepared = Prepared::from_config(&cfg, &base)?;
            let (outcomes, best) = harness::run_sweep(&cfg, &prepared)?;
            harness::write_sweep(&common.out.join("sweep.csv"), &outcomes)?;
            for o in &outcomes {
                println!("{} final q50 {}", o.variant.name, o.final_median());
            }
            println!("best {}", outcomes[best].variant.name);
        }
    }
    Ok(())
}
