use std::collections::VecDeque;

use cbirl::config::{Baselines, EnvConfig, ExperimentConfig, ExpertConfig};
use cbirl::formats::parse_map;
use cbirl::harness::{
    evaluate, record_trajectory, run_cbirl, train_expert, write_results, CbirlRun, EvalReport, Greedy, Prepared,
    UniformRandom,
};
use cbirl::world::World;
use cbirl_core::agent::AgentConfig;
use cbirl_core::case_base::CaseBase;
use cbirl_core::env::{ChainWorld, Environment, GridAction, GridWorld, MountainCar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAZE: &str = "\
S.........
..........
.######...
......#...
......#...
..#####...
..........
...####...
......#...
......#..G
";

fn bfs(grid: &GridWorld) -> usize {
    let (w, h) = (grid.width(), grid.height());
    let mut dist = vec![usize::MAX; w * h];
    let (sx, sy) = grid.start();
    dist[sy * w + sx] = 0;
    let mut queue = VecDeque::from([(sx, sy)]);
    while let Some((x, y)) = queue.pop_front() {
        if (x, y) == grid.goal() {
            return dist[y * w + x];
        }
        let d = dist[y * w + x];
        let candidates = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for (nx, ny) in candidates {
            if nx < w && ny < h && !grid.is_wall(nx, ny) && dist[ny * w + nx] == usize::MAX {
                dist[ny * w + nx] = d + 1;
                queue.push_back((nx, ny));
            }
        }
    }
    panic!("goal unreachable");
}

#[test]
fn random_policy_matches_monte_carlo_random_walk() {
    for cells in [20, 6] {
        let mut env = World::chain(ChainWorld::new(cells).unwrap());
        let episodes = 4000;
        let seeds: Vec<u64> = (0..episodes).collect();
        let returns = evaluate(&mut UniformRandom::new(2, 11), &mut env, &seeds).unwrap();
        let mean = returns.iter().sum::<f64>() / episodes as f64;

        // Independent walk on integer cells with its own coin flips.
        let horizon = cells + 10;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sims = 200_000;
        let hits = (0..sims)
            .filter(|_| {
                let mut pos = 0usize;
                (0..horizon).any(|_| {
                    pos = if rng.gen_bool(0.5) { (pos + 1).min(cells - 1) } else { pos.saturating_sub(1) };
                    pos == cells - 1
                })
            })
            .count();
        let p = hits as f64 / sims as f64;
        let sigma = (p * (1.0 - p) / episodes as f64).sqrt().max(1.0 / episodes as f64);
        assert!((mean - p).abs() <= 3.0 * sigma, "cells {cells}: {mean} vs {p} (sigma {sigma})");
    }
}

#[test]
fn chain_expert_succeeds_every_episode() {
    let world = World::chain(ChainWorld::new(20).unwrap());
    let cfg = ExpertConfig {
        steps: 20_000,
        ..ExpertConfig::default()
    };
    let expert = train_expert(&world, &cfg).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let returns = evaluate(&mut Greedy(&expert), &mut world.clone(), &seeds).unwrap();
    assert!(returns.iter().all(|&r| r == 1.0));
}

#[test]
fn grid_expert_path_is_near_shortest() {
    for grid in [GridWorld::open(10, 10).unwrap(), parse_map(MAZE).unwrap()] {
        let shortest = bfs(&grid);
        let world = World::grid(grid);
        let expert = train_expert(&world, &ExpertConfig::default()).unwrap();
        let t = record_trajectory(&expert, &world, 0, false).unwrap().unwrap();
        let path = t.len() - 1;
        assert!(path <= shortest + 2, "path {path}, shortest {shortest}");
    }
}

#[test]
fn mountain_car_expert_reaches_the_flag() {
    let world = World::mountain_car(MountainCar);
    // Optimistic values carry exploration: a random walk almost never
    // reaches the flag within the horizon.
    let cfg = ExpertConfig {
        steps: 6_000_000,
        agent: AgentConfig {
            q_init: 1.0,
            learning_rate: 0.1,
            epsilon_start: 0.0,
            epsilon_end: 0.0,
            ..AgentConfig::default()
        },
        ..ExpertConfig::default()
    };
    let expert = train_expert(&world, &cfg).unwrap();
    let seeds: Vec<u64> = (100..200).collect();
    let mut env = world.clone();
    let mut reached = 0;
    for &seed in &seeds {
        let mut s = env.reset(seed);
        for _ in 0..env.spec().horizon {
            s = env.step(expert.greedy_action(&s).unwrap()).unwrap().next_state;
        }
        if s[0] >= MountainCar::GOAL_POSITION {
            reached += 1;
        }
    }
    assert!(reached >= 95, "{reached} of 100");
}

#[test]
fn recorded_trajectories_are_state_only_and_reproducible() {
    let world = World::grid(GridWorld::open(6, 6).unwrap());
    let cfg = ExpertConfig {
        steps: 20_000,
        ..ExpertConfig::default()
    };
    let expert = train_expert(&world, &cfg).unwrap();
    let t = record_trajectory(&expert, &world, 3, false).unwrap().unwrap();
    assert_eq!(t[0], world.clone().reset(3));
    // Each entry is exactly one state vector: there is nowhere to keep an action.
    assert!(t.iter().all(|s| s.len() == world.spec().state_dim));
    assert!(world.is_target(t.last().unwrap()));
    assert!(t[..t.len() - 1].iter().all(|s| !world.is_target(s)));
    assert_eq!(record_trajectory(&expert, &world, 3, false).unwrap().unwrap(), t);
}

fn small_chain(total_steps: usize) -> (ExperimentConfig, Prepared) {
    let mut cfg = ExperimentConfig::new(EnvConfig::Chain { cells: 8 });
    cfg.total_steps = total_steps;
    cfg.eval_every = 200;
    cfg.eval_episodes = 4;
    cfg.equality.hidden = vec![16];
    cfg.equality.updates_per_episode = 5;
    let world = World::chain(ChainWorld::new(8).unwrap());
    let chain = ChainWorld::new(8).unwrap();
    let case_base = CaseBase::new(vec![(0..8).step_by(2).map(|i| chain.encode(i)).collect()]).unwrap();
    let prepared = Prepared {
        world,
        case_base,
        baselines: Baselines {
            random: 0.0,
            expert: 1.0,
        },
        recorded_seed: None,
    };
    (cfg, prepared)
}

#[test]
fn unreachable_threshold_gives_constant_shaped_reward() {
    let (mut cfg, prepared) = small_chain(400);
    cfg.reward.tau = 1.0 - 1e-12;
    cfg.reward.alpha = 0.25;
    cfg.reward.mu = -2.0;
    let mut run = CbirlRun::new(&cfg, prepared.world, prepared.case_base, 5).unwrap();
    while !run.is_done() {
        run.run_episode().unwrap();
        assert!(!run.episode_rewards().is_empty());
        for &r in run.episode_rewards() {
            assert_eq!(r, (1.0 - 0.25) * -2.0);
        }
    }
}

#[test]
fn resuming_a_checkpoint_reproduces_the_reports() {
    let (cfg, prepared) = small_chain(1_000);
    let mut run = CbirlRun::new(&cfg, prepared.world, prepared.case_base, 2).unwrap();
    for _ in 0..7 {
        run.run_episode().unwrap();
    }
    let mut resumed = run.clone();
    run.run_to_end().unwrap();
    resumed.run_to_end().unwrap();
    assert_eq!(run.evals(), resumed.evals());
    assert_eq!(run.agent().action_values(&[0.5]).unwrap(), resumed.agent().action_values(&[0.5]).unwrap());
}

#[test]
fn reports_are_ordered_and_pool_every_seed() {
    let (mut cfg, prepared) = small_chain(1_000);
    cfg.seeds = vec![0, 1, 2];
    let result = run_cbirl(&cfg, &prepared).unwrap();
    let steps: Vec<usize> = result.reports.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![200, 400, 600, 800, 1000]);
    for r in &result.reports {
        assert_eq!(r.n_episodes, 3 * 4);
        assert!(r.q25 <= r.q50 && r.q50 <= r.q75);
    }
}

#[test]
fn identical_runs_write_identical_csv() {
    let (mut cfg, prepared) = small_chain(800);
    cfg.seeds = vec![4, 5];
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.csv"));
        write_results(&path, &run_cbirl(&cfg, &prepared).unwrap().reports).unwrap();
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn grid_actions_cover_four_moves() {
    assert_eq!(GridAction::ALL.len(), World::grid(GridWorld::open(3, 3).unwrap()).spec().action_count);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn report_quantiles_are_ordered(
        per_seed in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 1..10), 1..4),
        random in -2.0f64..0.0,
        span in 0.1f64..3.0,
    ) {
        let n: usize = per_seed.iter().map(Vec::len).sum();
        let r = EvalReport::from_points(10, per_seed, Baselines { random, expert: random + span }).unwrap();
        prop_assert!(r.q25 <= r.q50 && r.q50 <= r.q75);
        prop_assert_eq!(r.n_episodes, n);
    }

    #[test]
    fn greedy_evaluation_is_pure(seed in 0u64..1000) {
        let world = World::grid(GridWorld::open(4, 4).unwrap());
        let spec = world.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = cbirl_core::agent::QAgent::for_env(
            world.discretizer(), spec.state_dim, spec.action_count, &Default::default(), &mut rng,
        ).unwrap();
        let a = evaluate(&mut Greedy(&agent), &mut world.clone(), &[seed, seed + 1]).unwrap();
        let b = evaluate(&mut Greedy(&agent), &mut world.clone(), &[seed, seed + 1]).unwrap();
        prop_assert_eq!(a, b);
    }
}
