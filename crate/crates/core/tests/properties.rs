//! Property tests over the fuzzy algebra and the evaluator.

use proptest::prelude::*;

use teamform_core::evaluator::{communication_efficiency, Assignment};
use teamform_core::fuzzy::{
    ifn_distance, ifn_support, ifpiwa_aggregate, ifpiwa_weights, match_score, CompetencyWeights,
    Ifn,
};
use teamform_core::problem::{generate_instance, GeneratorParams};

fn arb_ifn() -> impl Strategy<Value = Ifn> {
    (0.0f64..=1.0).prop_flat_map(|mu| {
        (Just(mu), 0.0f64..=1.0).prop_map(move |(mu, t)| {
            let nu = t * (1.0 - mu);
            Ifn::new(mu, nu).unwrap()
        })
    })
}

fn arb_weighted(len: usize) -> impl Strategy<Value = (Vec<Ifn>, CompetencyWeights)> {
    (
        prop::collection::vec(arb_ifn(), len),
        prop::collection::vec(0.01f64..1.0, len),
    )
        .prop_map(|(alphas, raw)| {
            let sum: f64 = raw.iter().sum();
            let w = CompetencyWeights::new(raw.iter().map(|x| x / sum).collect()).unwrap();
            (alphas, w)
        })
}

proptest! {
    #[test]
    fn distance_is_a_bounded_metric(a in arb_ifn(), b in arb_ifn(), c in arb_ifn()) {
        let dab = ifn_distance(a, b);
        prop_assert!((0.0..=1.0).contains(&dab));
        prop_assert_eq!(dab, ifn_distance(b, a));
        prop_assert_eq!(ifn_distance(a, a), 0.0);
        // Triangle inequality for the Hamming form.
        prop_assert!(dab <= ifn_distance(a, c) + ifn_distance(c, b) + 1e-12);
        prop_assert!((ifn_support(a, b) - (1.0 - dab)).abs() < 1e-15);
    }

    #[test]
    fn weights_normalize_and_commute_with_permutation(
        (alphas, w) in (2usize..=5).prop_flat_map(arb_weighted),
        shift in 0usize..5,
    ) {
        let rho = ifpiwa_weights(&alphas, &w).unwrap();
        prop_assert!((rho.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(rho.iter().all(|&r| r >= 0.0));

        // Rotating inputs rotates the weights identically.
        let n = alphas.len();
        let k = shift % n;
        let alphas2: Vec<Ifn> = (0..n).map(|i| alphas[(i + k) % n]).collect();
        let raw2: Vec<f64> = (0..n).map(|i| w.as_slice()[(i + k) % n]).collect();
        let w2 = CompetencyWeights::new(raw2).unwrap();
        let rho2 = ifpiwa_weights(&alphas2, &w2).unwrap();
        for i in 0..n {
            prop_assert!((rho2[i] - rho[(i + k) % n]).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_is_valid_and_score_monotone(
        (alphas, w) in (1usize..=5).prop_flat_map(arb_weighted),
    ) {
        let agg = ifpiwa_aggregate(&alphas, &w).unwrap();
        prop_assert!(agg.mu() >= 0.0 && agg.nu() >= 0.0);
        prop_assert!(agg.mu() + agg.nu() <= 1.0 + 1e-9);
        prop_assert!((-1.0..=1.0).contains(&match_score(agg)));
    }

    #[test]
    fn score_increases_with_membership(mu in 0.0f64..0.9, nu in 0.0f64..0.05, d in 0.001f64..0.1) {
        let a = Ifn::new(mu, nu).unwrap();
        let b = Ifn::new((mu + d).min(1.0 - nu), nu).unwrap();
        prop_assert!(match_score(b) >= match_score(a));
        let c = Ifn::new(mu, (nu + d).min(1.0 - mu)).unwrap();
        prop_assert!(match_score(c) <= match_score(a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gamma_stays_in_range_on_random_teams(seed in 0u64..500, team_seed in 0u64..1000) {
        let inst = generate_instance(&GeneratorParams::with_positions(6), seed % 20).unwrap();
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(team_seed);
        let mut ids: Vec<usize> = (0..inst.num_candidates()).collect();
        ids.shuffle(&mut rng);
        let asg = Assignment::from_pairs(
            ids[..inst.num_positions()]
                .iter()
                .enumerate()
                .map(|(j, &c)| (c, j))
                .collect(),
        );
        let gamma = communication_efficiency(&inst, &asg).unwrap();
        prop_assert!((1.0..=2.0 + 1e-9).contains(&gamma));
    }
}
