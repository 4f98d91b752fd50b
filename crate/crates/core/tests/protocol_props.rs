use cbirl_core::protocol::{quantiles, quartiles, scale_returns};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sort, then interpolate between the two neighbouring order statistics.
fn oracle_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() as f64 - 1.0) * q;
    let below = h.floor();
    let i = below as usize;
    if i + 1 >= v.len() {
        return v[i];
    }
    v[i] + (h - below) * (v[i + 1] - v[i])
}

#[test]
fn random_sixty_vector_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let values: Vec<f64> = (0..60).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let got = quartiles(&values).unwrap();
    for (g, q) in got.iter().zip([0.25, 0.5, 0.75]) {
        assert!((g - oracle_quantile(&values, q)).abs() <= 1e-12);
    }
}

#[test]
fn endpoints_scale_exactly() {
    let scaled = scale_returns(&[-3.25, 17.5], -3.25, 17.5).unwrap();
    assert_eq!(scaled, vec![0.0, 1.0]);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quantiles_match_oracle(
        values in prop::collection::vec(-1e6f64..1e6, 1..80),
        q in 0.0f64..=1.0,
    ) {
        let got = quantiles(&values, &[q]).unwrap()[0];
        prop_assert!((got - oracle_quantile(&values, q)).abs() <= 1e-12 * (1.0 + got.abs()));
    }

    #[test]
    fn quartiles_are_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..80)) {
        let [a, b, c] = quartiles(&values).unwrap();
        prop_assert!(a <= b && b <= c);
    }

    #[test]
    fn scaling_is_affine(
        random in -100.0f64..100.0,
        span in prop::sample::select(vec![-50.0, -1.0, 0.5, 3.0, 80.0]),
        r in -200.0f64..200.0,
    ) {
        let expert = random + span;
        let got = scale_returns(&[r, random, expert], random, expert).unwrap();
        prop_assert_eq!(got[1], 0.0);
        prop_assert_eq!(got[2], 1.0);
        prop_assert!((got[0] - (r - random) / (expert - random)).abs() < 1e-12);
    }
}
