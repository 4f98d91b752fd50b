use cbirl_core::agent::{AgentConfig, QAgent, Transition};
use cbirl_core::env::Environment;
use cbirl_core::Trajectory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, evaluate, streams, Greedy, HarnessError, UniformRandom};
use crate::config::{Baselines, ExpertConfig};
use crate::world::World;

/// Epsilon-greedy Q-learning on the hidden task reward for `steps`
/// environment steps. Entering the target ends the episode; running out of
/// horizon is a truncation, so that transition still bootstraps.
pub fn train_on_true_reward(world: &World, cfg: &AgentConfig, steps: usize, seed: u64) -> Result<QAgent, HarnessError> {
    let mut env = world.clone();
    let spec = env.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = QAgent::for_env(env.discretizer(), spec.state_dim, spec.action_count, cfg, &mut rng)?;
    let schedule = cfg.schedule(steps);
    let mut done = 0;
    let mut episode = 0;
    while done < steps {
        let mut s = env.reset(derive_seed(seed, streams::EXPERT_TRAINING, episode));
        episode += 1;
        for _ in 0..spec.horizon {
            if done == steps {
                break;
            }
            let a = agent.select_action(&s, schedule.value(done), &mut rng)?;
            let r = env.step(a)?;
            let entered = r.terminal_reached;
            let transition = Transition {
                state: s,
                action: a,
                reward: r.true_reward,
                next_state: r.next_state.clone(),
                episode_end: entered,
            };
            agent.observe(transition, &mut rng)?;
            s = r.next_state;
            done += 1;
            if entered {
                break;
            }
        }
    }
    Ok(agent)
}

/// Trains an expert and checks its mean greedy return against the configured
/// threshold.
pub fn train_expert(world: &World, cfg: &ExpertConfig) -> Result<QAgent, HarnessError> {
    let agent = train_on_true_reward(world, &cfg.agent, cfg.steps, cfg.train_seed)?;
    let seeds: Vec<u64> = (0..cfg.expert_episodes as u64)
        .map(|i| derive_seed(cfg.train_seed, streams::EXPERT_BASELINE, i))
        .collect();
    let returns = evaluate(&mut Greedy(&agent), &mut world.clone(), &seeds)?;
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    log::info!("expert mean greedy return {mean:.4} over {} episodes", returns.len());
    if mean < cfg.threshold {
        return Err(HarnessError::ExpertTrainingFailed {
            mean,
            threshold: cfg.threshold,
        });
    }
    Ok(agent)
}

/// Greedy rollout from `reset(seed)`, keeping states only, up to and
/// including the first target entry. With `include_frozen_tail` the rest of
/// the fixed-length episode is kept as well. Fails if the target is missed.
pub fn record_trajectory(
    agent: &QAgent,
    world: &World,
    seed: u64,
    include_frozen_tail: bool,
) -> Result<Option<Trajectory>, HarnessError> {
    let mut env = world.clone();
    let mut s = env.reset(seed);
    let mut states = vec![s.clone()];
    let mut reached = env.is_target(&s);
    for _ in 0..env.spec().horizon {
        if reached && !include_frozen_tail {
            break;
        }
        let r = env.step(agent.greedy_action(&s)?)?;
        s = r.next_state;
        states.push(s.clone());
        reached |= r.terminal_reached;
    }
    Ok(reached.then_some(states))
}

/// Records from `record_seed`, moving on to the next seed whenever the
/// expert misses the target.
pub fn record_expert(agent: &QAgent, world: &World, cfg: &ExpertConfig) -> Result<(u64, Trajectory), HarnessError> {
    let first = cfg.record_seed;
    let last = first + cfg.record_attempts as u64 - 1;
    for seed in first..=last {
        if let Some(t) = record_trajectory(agent, world, seed, cfg.include_frozen_tail)? {
            return Ok((seed, t));
        }
        log::warn!("expert missed the target on seed {seed}; trying the next seed");
    }
    Err(HarnessError::ExpertMissedTarget { first, last })
}

/// Mean hidden return of a uniform-random policy and of the greedy expert.
pub fn measure_baselines(agent: &QAgent, world: &World, cfg: &ExpertConfig) -> Result<Baselines, HarnessError> {
    let actions = world.spec().action_count;
    let random_seeds: Vec<u64> = (0..cfg.random_episodes as u64)
        .map(|i| derive_seed(cfg.train_seed, streams::RANDOM_BASELINE, i))
        .collect();
    let expert_seeds: Vec<u64> = (0..cfg.expert_episodes as u64)
        .map(|i| derive_seed(cfg.train_seed, streams::EXPERT_BASELINE, i))
        .collect();
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let random = mean(evaluate(
        &mut UniformRandom::new(actions, derive_seed(cfg.train_seed, streams::RANDOM_BASELINE, u64::MAX)),
        &mut world.clone(),
        &random_seeds,
    )?);
    let expert = mean(evaluate(&mut Greedy(agent), &mut world.clone(), &expert_seeds)?);
    Ok(Baselines { random, expert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cbirl_core::env::ChainWorld;

    #[test]
    fn chain_expert_records_a_state_only_path() {
        let world = World::chain(ChainWorld::new(8).unwrap());
        let cfg = ExpertConfig {
            steps: 5_000,
            ..ExpertConfig::default()
        };
        let agent = train_expert(&world, &cfg).unwrap();
        let (seed, t) = record_expert(&agent, &world, &cfg).unwrap();
        assert_eq!(seed, 0);
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], world.clone().reset(0));
        assert_eq!(t.last().unwrap(), &vec![1.0]);
        let again = record_trajectory(&agent, &world, 0, false).unwrap().unwrap();
        assert_eq!(again, t);
        let tail = record_trajectory(&agent, &world, 0, true).unwrap().unwrap();
        assert_eq!(tail.len(), world.spec().horizon + 1);
        assert_eq!(&tail[..8], &t[..]);
    }
}
