use std::path::Path;

use cbirl_core::agent::{AgentError, EpsilonSchedule, QAgent, Transition};
use cbirl_core::case_base::{reward, subsample, CaseBase};
use cbirl_core::env::{Environment, RewardFree};
use cbirl_core::equality::{train_equality_net, EqualityNet, ReplayBuffer};
use cbirl_core::numcore::Optimizer;
use cbirl_core::protocol::{quartiles, scale_returns};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, evaluate, measure_baselines, record_expert, streams, train_expert, Greedy, HarnessError};
use crate::config::{Baselines, ExperimentConfig};
use crate::formats;
use crate::world::World;

/// Hidden returns of one evaluation round of a single seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub step: usize,
    pub returns: Vec<f64>,
}

/// One evaluation round pooled over all seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub step: usize,
    /// Raw returns, indexed by seed position then episode.
    pub per_seed: Vec<Vec<f64>>,
    pub scaled: Vec<Vec<f64>>,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub n_episodes: usize,
}

impl EvalReport {
    pub fn from_points(step: usize, per_seed: Vec<Vec<f64>>, baselines: Baselines) -> Result<Self, HarnessError> {
        let scaled = per_seed
            .iter()
            .map(|r| scale_returns(r, baselines.random, baselines.expert))
            .collect::<Result<Vec<_>, _>>()?;
        let pooled: Vec<f64> = scaled.iter().flatten().copied().collect();
        let [q25, q50, q75] = quartiles(&pooled)?;
        Ok(Self {
            step,
            per_seed,
            scaled,
            q25,
            q50,
            q75,
            n_episodes: pooled.len(),
        })
    }

    /// Median scaled return of each seed on its own.
    pub fn seed_medians(&self) -> Vec<f64> {
        self.scaled
            .iter()
            .map(|s| quartiles(s).map(|q| q[1]).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Case-based learning for one seed: the policy, the equality net and every
/// source of randomness. Cloning yields an in-memory checkpoint that resumes
/// identically.
#[derive(Debug, Clone)]
pub struct CbirlRun {
    seed: u64,
    cfg: ExperimentConfig,
    world: World,
    case_base: CaseBase,
    agent: QAgent,
    equality: EqualityNet,
    optimizer: Optimizer,
    replay: ReplayBuffer,
    rng: ChaCha8Rng,
    schedule: EpsilonSchedule,
    steps: usize,
    episodes: u64,
    evals: Vec<EvalPoint>,
    episode_rewards: Vec<f64>,
}

impl CbirlRun {
    pub fn new(cfg: &ExperimentConfig, world: World, case_base: CaseBase, seed: u64) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let spec = world.spec();
        if case_base.is_empty() {
            return Err(crate::config::ConfigError::Invalid("the case base holds no trajectories".into()).into());
        }
        if case_base.state_dim() != spec.state_dim {
            return Err(crate::config::ConfigError::Invalid(format!(
                "case base states have dimension {}, the environment {}",
                case_base.state_dim(),
                spec.state_dim
            ))
            .into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, streams::RUN, 0));
        let agent = QAgent::for_env(world.discretizer(), spec.state_dim, spec.action_count, &cfg.agent, &mut rng)?;
        let equality = EqualityNet::new(spec.state_dim, &cfg.equality.hidden, &mut rng)?;
        Ok(Self {
            seed,
            schedule: cfg.agent.schedule(cfg.total_steps),
            optimizer: Optimizer::adam(cfg.equality.learning_rate),
            replay: ReplayBuffer::new(cfg.equality.replay_capacity),
            cfg: cfg.clone(),
            world,
            case_base,
            agent,
            equality,
            rng,
            steps: 0,
            episodes: 0,
            evals: Vec::new(),
            episode_rewards: Vec::new(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn is_done(&self) -> bool {
        self.steps >= self.cfg.total_steps
    }

    pub fn agent(&self) -> &QAgent {
        &self.agent
    }

    pub fn equality(&self) -> &EqualityNet {
        &self.equality
    }

    pub fn evals(&self) -> &[EvalPoint] {
        &self.evals
    }

    /// Shaped rewards handed to the agent during the latest episode.
    pub fn episode_rewards(&self) -> &[f64] {
        &self.episode_rewards
    }

    /// Current retrieval reward of a state.
    pub fn reward(&self, state: &[f64]) -> Result<f64, HarnessError> {
        Ok(reward(&self.equality, &self.case_base, state, &self.cfg.reward)?)
    }

    /// One training episode. Stops early when the step budget runs out, in
    /// which case the partial trajectory is discarded.
    pub fn run_episode(&mut self) -> Result<(), HarnessError> {
        let step = self.steps;
        self.episode().map_err(|e| HarnessError::AtStep {
            seed: self.seed,
            step: self.steps.max(step),
            source: Box::new(e),
        })
    }

    pub fn run_to_end(&mut self) -> Result<(), HarnessError> {
        while !self.is_done() {
            self.run_episode()?;
        }
        Ok(())
    }

    fn episode(&mut self) -> Result<(), HarnessError> {
        let total = self.cfg.total_steps;
        let every_k = self.cfg.reward.reward_every_k;
        let horizon = self.world.spec().horizon;
        let reset_seed = derive_seed(self.seed, streams::TRAIN_EPISODE, self.episodes);
        // The learner only ever sees states: the hidden reward stays behind
        // the wrapper.
        let mut training_world = self.world.clone();
        let mut env = RewardFree::new(&mut training_world);
        let mut s = env.reset(reset_seed);
        let mut trajectory = vec![s.clone()];
        let mut r_pre = self.reward(&s)?;
        self.episode_rewards.clear();
        for t in 0..horizon {
            if self.steps >= total {
                return Ok(());
            }
            let a = self.agent.select_action(&s, self.schedule.value(self.steps), &mut self.rng)?;
            let next = env.step(a)?;
            let r_post = if (t + 1) % every_k == 0 {
                self.reward(&next)?
            } else {
                r_pre
            };
            let r = cbirl_core::case_base::shaped_reward(r_post, r_pre, &self.cfg.reward);
            if !r.is_finite() {
                return Err(AgentError::NonFiniteReward(r).into());
            }
            self.agent.observe(
                Transition {
                    state: s,
                    action: a,
                    reward: r,
                    next_state: next.clone(),
                    episode_end: t + 1 == horizon,
                },
                &mut self.rng,
            )?;
            self.episode_rewards.push(r);
            r_pre = r_post;
            trajectory.push(next.clone());
            s = next;
            self.steps += 1;
            if self.steps.is_multiple_of(self.cfg.eval_every) || self.steps == total {
                self.evaluate_now()?;
            }
        }
        self.episodes += 1;
        self.replay.add_trajectory(trajectory)?;
        if self.replay.len() >= 2 {
            train_equality_net(
                &mut self.equality,
                &mut self.optimizer,
                &self.replay,
                &self.case_base,
                &self.cfg.equality,
                self.cfg.equality.updates_per_episode,
                &mut self.rng,
            )?;
        }
        Ok(())
    }

    fn evaluate_now(&mut self) -> Result<(), HarnessError> {
        if self.evals.last().is_some_and(|p| p.step == self.steps) {
            return Ok(());
        }
        let seeds: Vec<u64> = (0..self.cfg.eval_episodes as u64)
            .map(|i| derive_seed(self.seed, streams::EVAL_EPISODE, i))
            .collect();
        let returns = evaluate(&mut Greedy(&self.agent), &mut self.world.clone(), &seeds)?;
        self.evals.push(EvalPoint {
            step: self.steps,
            returns,
        });
        Ok(())
    }
}

/// Everything the learning runs share: the environment, the case base and
/// the scaling endpoints.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub world: World,
    pub case_base: CaseBase,
    pub baselines: Baselines,
    /// Seed the expert trajectory was recorded on, when it was recorded here.
    pub recorded_seed: Option<u64>,
}

impl Prepared {
    /// Loads the configured case base or trains an expert and records one
    /// subsampled trajectory. Missing baselines are measured.
    pub fn from_config(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let world = cfg.env.build(base_dir)?;
        let loaded = match &cfg.case_base {
            Some(path) => Some(formats::load_case_base(&base_dir.join(path))?),
            None => None,
        };
        if let (Some(case_base), Some(baselines)) = (&loaded, cfg.baselines) {
            return Ok(Self {
                world,
                case_base: case_base.clone(),
                baselines,
                recorded_seed: None,
            });
        }
        let expert = train_expert(&world, &cfg.expert)?;
        let baselines = match cfg.baselines {
            Some(b) => b,
            None => measure_baselines(&expert, &world, &cfg.expert)?,
        };
        log::info!("baselines: random {:.4}, expert {:.4}", baselines.random, baselines.expert);
        let (case_base, recorded_seed) = match loaded {
            Some(cb) => (cb, None),
            None => {
                let (seed, trajectory) = record_expert(&expert, &world, &cfg.expert)?;
                let kept = subsample(&trajectory, cfg.subsample_k)?;
                log::info!(
                    "recorded {} expert states on seed {seed}, kept {}",
                    trajectory.len(),
                    kept.len()
                );
                (CaseBase::new(vec![kept])?, Some(seed))
            }
        };
        Ok(Self {
            world,
            case_base,
            baselines,
            recorded_seed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub run: CbirlRun,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub baselines: Baselines,
    pub case_base: CaseBase,
    pub reports: Vec<EvalReport>,
    pub seeds: Vec<SeedOutcome>,
}

impl ExperimentResult {
    pub fn final_report(&self) -> Option<&EvalReport> {
        self.reports.last()
    }
}

/// Runs every configured seed (in parallel) and pools the evaluations.
pub fn run_cbirl(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<ExperimentResult, HarnessError> {
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut run = CbirlRun::new(cfg, prepared.world.clone(), prepared.case_base.clone(), seed)?;
            run.run_to_end()?;
            Ok(SeedOutcome { seed, run })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let reports = aggregate(&runs, prepared.baselines)?;
    Ok(ExperimentResult {
        baselines: prepared.baselines,
        case_base: prepared.case_base.clone(),
        reports,
        seeds: runs,
    })
}

fn aggregate(runs: &[SeedOutcome], baselines: Baselines) -> Result<Vec<EvalReport>, HarnessError> {
    let Some(first) = runs.first() else {
        return Ok(Vec::new());
    };
    first
        .run
        .evals()
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let per_seed = runs.iter().map(|o| o.run.evals()[i].returns.clone()).collect();
            EvalReport::from_points(point.step, per_seed, baselines)
        })
        .collect()
}

/// Prepares the case base and runs all seeds.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentResult, HarnessError> {
    let prepared = Prepared::from_config(cfg, base_dir)?;
    run_cbirl(cfg, &prepared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EnvConfig;
    use cbirl_core::env::ChainWorld;

    fn small() -> (ExperimentConfig, World, CaseBase) {
        let mut cfg = ExperimentConfig::new(EnvConfig::Chain { cells: 6 });
        cfg.total_steps = 300;
        cfg.eval_every = 100;
        cfg.eval_episodes = 3;
        cfg.equality.hidden = vec![8];
        cfg.equality.updates_per_episode = 2;
        let cb = CaseBase::new(vec![(0..6).map(|i| vec![i as f64]).collect()]).unwrap();
        (cfg, World::chain(ChainWorld::new(6).unwrap()), cb)
    }

    #[test]
    fn evaluates_on_schedule() {
        let (cfg, world, cb) = small();
        let mut run = CbirlRun::new(&cfg, world, cb, 0).unwrap();
        run.run_to_end().unwrap();
        let steps: Vec<usize> = run.evals().iter().map(|e| e.step).collect();
        assert_eq!(steps, vec![100, 200, 300]);
        assert!(run.evals().iter().all(|e| e.returns.len() == 3));
        assert_eq!(run.steps(), 300);
    }

    #[test]
    fn final_step_is_always_evaluated() {
        let (mut cfg, world, cb) = small();
        cfg.total_steps = 250;
        let mut run = CbirlRun::new(&cfg, world, cb, 0).unwrap();
        run.run_to_end().unwrap();
        let steps: Vec<usize> = run.evals().iter().map(|e| e.step).collect();
        assert_eq!(steps, vec![100, 200, 250]);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let (cfg, world, _) = small();
        let cb = CaseBase::new(vec![vec![vec![0.0, 0.0]]]).unwrap();
        let err = CbirlRun::new(&cfg, world, cb, 0).unwrap_err();
        assert!(err.is_config_error());
    }
}
