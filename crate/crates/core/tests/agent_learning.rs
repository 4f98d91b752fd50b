use cbirl_core::agent::{AgentConfig, QAgent, Transition};
use cbirl_core::env::{ChainWorld, Environment, Simulator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tabular_q_learns_chain_from_true_reward() {
    let mut env = Simulator::new(ChainWorld::new(20).unwrap());
    let spec = env.spec();
    // Optimistic values: the sparse reward is out of reach of a random walk.
    let cfg = AgentConfig {
        q_init: 1.0,
        ..AgentConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = QAgent::for_env(env.discretizer(), spec.state_dim, spec.action_count, &cfg, &mut rng).unwrap();
    let budget = 20_000;
    let schedule = cfg.schedule(budget);
    let mut steps = 0;
    let mut episode = 0;
    while steps < budget {
        let mut s = env.reset(episode);
        episode += 1;
        for t in 0..spec.horizon {
            if steps == budget {
                break;
            }
            let a = agent.select_action(&s, schedule.value(steps), &mut rng).unwrap();
            let r = env.step(a).unwrap();
            agent
                .observe(
                    Transition {
                        state: s,
                        action: a,
                        reward: r.true_reward,
                        next_state: r.next_state.clone(),
                        episode_end: t + 1 == spec.horizon,
                    },
                    &mut rng,
                )
                .unwrap();
            s = r.next_state;
            steps += 1;
        }
    }
    let mut reached = 0;
    for seed in 0..20 {
        let mut s = env.reset(10_000 + seed);
        let mut hit = false;
        for _ in 0..spec.horizon {
            let r = env.step(agent.greedy_action(&s).unwrap()).unwrap();
            hit |= r.true_reward == 1.0;
            s = r.next_state;
        }
        reached += hit as usize;
    }
    assert!(reached as f64 / 20.0 >= 0.95, "{reached}/20");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn greedy_selection_is_pure(values in prop::collection::vec(-10.0f64..10.0, 1..8), seed in any::<u64>()) {
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let first = cbirl_core::agent::epsilon_greedy(&values, 0.0, &mut a);
        prop_assert_eq!(first, cbirl_core::agent::epsilon_greedy(&values, 0.0, &mut b));
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(first, values.iter().position(|&v| v == best).unwrap());
    }

    #[test]
    fn schedule_stays_in_unit_interval(
        start in 0.0f64..=1.0,
        end in 0.0f64..=1.0,
        fraction in 0.0f64..=1.0,
        total in 0usize..100_000,
        step in 0usize..200_000,
    ) {
        let cfg = AgentConfig { epsilon_start: start, epsilon_end: end, epsilon_decay_fraction: fraction, ..AgentConfig::default() };
        let e = cfg.schedule(total).value(step);
        prop_assert!((0.0..=1.0).contains(&e));
    }
}
