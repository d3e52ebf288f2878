use halfline_tasep::dehp::*;
use halfline_tasep::rational::{pow, ratio};
use halfline_tasep::Rate;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rates() -> Vec<Rate> {
    ["3/5", "3/4", "9/10", "0.3", "1/2"].iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn tree_matches_rewriting_for_short_words() {
    for alpha in rates().into_iter().filter(|a| !a.is_low_density()) {
        for len in 1..=7 {
            for eta in BinaryWord::all(len) {
                assert_eq!(
                    stationary_prob(&eta, &alpha).value,
                    rewrite_oracle(&eta, &alpha).value,
                    "{eta} at {alpha}"
                );
            }
        }
    }
}

#[test]
fn normalization_and_consistency() {
    for alpha in rates() {
        for len in 1..=8 {
            let mut total = BigRational::zero();
            for eta in BinaryWord::all(len) {
                let p = stationary_prob(&eta, &alpha).value;
                let split = stationary_prob(&eta.extended(false), &alpha).value
                    + stationary_prob(&eta.extended(true), &alpha).value;
                assert_eq!(p, split, "{eta} at {alpha}");
                total += p;
            }
            assert_eq!(total, BigRational::one(), "L={len} at {alpha}");
        }
    }
}

#[test]
fn half_is_uniform() {
    let half = ratio(1, 2);
    for len in 1..=8 {
        for eta in BinaryWord::all(len) {
            assert_eq!(mpa_value(&eta, &half), pow(&half, len));
        }
    }
}

#[test]
fn layered_construction_agrees() {
    for len in 1..=10 {
        for eta in BinaryWord::all(len) {
            assert_eq!(path_counts_layered(&eta), path_counts(&eta), "{eta}");
        }
    }
}

#[test]
fn density_profile_of_first_site() {
    // mu(eta_1 = 1) = <w|D|v> = 1 - c/alpha
    for alpha in ["3/5", "3/4", "9/10"] {
        let a: Rate = alpha.parse().unwrap();
        let p = stationary_prob(&"1".parse().unwrap(), &a).value;
        assert_eq!(p, BigRational::one() - ratio(1, 4) / a.value());
    }
}

fn word_strategy() -> impl Strategy<Value = BinaryWord> {
    prop::collection::vec(any::<bool>(), 1..14).prop_map(|b| BinaryWord::new(b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_are_in_unit_interval(eta in word_strategy(), num in 51u32..100) {
        let alpha = Rate::from_ratio(num as i64, 100).unwrap();
        let p = stationary_prob(&eta, &alpha);
        prop_assert!(p.assumes_conjecture);
        prop_assert!(p.value > BigRational::zero());
        prop_assert!(p.value < BigRational::one());
    }

    #[test]
    fn polynomial_matches_tree(eta in word_strategy(), num in 1u32..100) {
        let alpha = ratio(num as i64, 100);
        prop_assert_eq!(mpa_polynomial(&eta).evaluate(&alpha), mpa_value(&eta, &alpha));
    }

    #[test]
    fn statistics_are_consistent(eta in word_strategy()) {
        let s = cluster_stats(&eta);
        prop_assert_eq!(s.ell, eta.ones());
        prop_assert_eq!(s.sigma.len(), s.clusters);
        prop_assert_eq!(s.tau.len(), s.clusters + 1);
        prop_assert_eq!(s.psi(1), s.ell);
        prop_assert_eq!(s.phi(0), eta.len() - s.ell);
        prop_assert!(s.sigma.iter().all(|&x| x > 0));
        prop_assert!(s.tau[1..s.clusters.max(1)].iter().all(|&x| x > 0) || s.clusters <= 1);
    }
}
