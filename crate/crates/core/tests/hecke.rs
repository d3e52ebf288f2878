use halfline_tasep::hecke::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn word(n: usize, l: &[usize]) -> GeneratorWord {
    GeneratorWord::new(n, l.to_vec()).unwrap()
}

#[test]
fn bfs_matches_inversion_formula() {
    for n in 1..=5 {
        let cache = LengthCache::new(n).unwrap();
        assert_eq!(cache.len(), (1..=n).product::<usize>() << n);
        for pi in SignedPermutation::all(n) {
            assert_eq!(cache.get(&pi), length_by_inversions(&pi), "{pi}");
        }
    }
}

#[test]
fn length_properties_on_b3() {
    let cache = LengthCache::new(3).unwrap();
    for pi in SignedPermutation::all(3) {
        assert_eq!(cache.get(&pi), cache.get(&pi.inverse()));
        assert_eq!(pi.inverse().inverse(), pi);
        for k in 0..3 {
            let up = cache.get(&pi.apply_generator(k)) as i64 - cache.get(&pi) as i64;
            assert_eq!(up.abs(), 1);
            assert_eq!(up == 1, pi.ascends(k));
            let once = hecke_apply(&pi, k);
            assert!(cache.get(&once) >= cache.get(&pi));
            assert_eq!(hecke_apply(&once, k), once);
        }
    }
}

#[test]
fn reversal_length_matches_bfs() {
    for (m1, m2) in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)] {
        let w = reduced_word_reversal(m1, m2).unwrap();
        let pi = SignedPermutation::from_word(&w);
        let n = m1 + m2 + 1;
        assert_eq!(pi.images(), (1..=n as i8).rev().collect::<Vec<_>>().as_slice());
        assert_eq!(length(&pi).unwrap() as usize, w.len());
        assert!(w.letters.iter().all(|&k| k >= 1));
    }
}

#[test]
fn tables_are_normalized() {
    for n in 1..=4 {
        let t = ctmc_distribution(n, 0.3, 2.0, &GeneratorWord::empty(n), &GeneratorWord::empty(n)).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-12);
        assert!(t.truncation < 1e-12);
    }
    assert!(matches!(
        ctmc_distribution(5, 0.3, 1.0, &GeneratorWord::empty(5), &GeneratorWord::empty(5)),
        Err(halfline_tasep::Error::RankTooLarge(5))
    ));
}

#[test]
fn inverse_pushforward_is_involution() {
    let e = GeneratorWord::empty(3);
    let t = ctmc_distribution(3, 0.7, 1.0, &word(3, &[1, 0]), &e).unwrap();
    assert_eq!(pushforward_inverse(&pushforward_inverse(&t)), t);
    let id = DistributionTable::point_mass(SignedPermutation::identity(3));
    assert_eq!(pushforward_inverse(&id), id);
}

#[test]
fn symmetry_for_reversal_word() {
    let w = reduced_word_reversal(1, 1).unwrap();
    for alpha in [0.3, 0.7] {
        assert!(symmetry_check(3, alpha, 1.0, &w).unwrap() <= 1e-10);
        assert!(symmetry_check(3, alpha, 1.0, &GeneratorWord::empty(3)).unwrap() <= 1e-10);
    }
}

#[test]
fn symmetry_for_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 3, 4] {
        for _ in 0..10 {
            let len = rng.random_range(0..=6);
            let letters = (0..len).map(|_| rng.random_range(0..n)).collect();
            let w = GeneratorWord::new(n, letters).unwrap();
            let tv = symmetry_check(n, 0.3, 0.5, &w).unwrap();
            assert!(tv <= 1e-10, "{w:?}: {tv}");
        }
    }
}

#[test]
fn different_reduced_words_agree() {
    // s1 s2 s1 = s2 s1 s2 and s0 s1 s0 s1 = s1 s0 s1 s0
    let e3 = GeneratorWord::empty(3);
    for (a, b) in [(vec![1, 2, 1], vec![2, 1, 2]), (vec![0, 1, 0, 1], vec![1, 0, 1, 0])] {
        let (wa, wb) = (word(3, &a), word(3, &b));
        assert_eq!(SignedPermutation::from_word(&wa), SignedPermutation::from_word(&wb));
        let ta = ctmc_distribution(3, 0.7, 1.0, &wa, &e3).unwrap();
        let tb = ctmc_distribution(3, 0.7, 1.0, &wb, &e3).unwrap();
        assert!(tv_distance(&ta, &tb) < 1e-15);
    }
}

#[test]
fn walk_matches_monte_carlo() {
    let (alpha, t, reps) = (0.7, 1.0, 2_000_000u64);
    let table = ctmc_distribution(2, alpha, t, &GeneratorWord::empty(2), &GeneratorWord::empty(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..reps {
        *counts.entry(sample_walk(2, alpha, t, &mut rng)).or_insert(0u64) += 1;
    }
    for pi in SignedPermutation::all(2) {
        let p = table.prob(&pi);
        let got = *counts.get(&pi).unwrap_or(&0) as f64 / reps as f64;
        let sd = (p * (1.0 - p) / reps as f64).sqrt().max(1e-12);
        assert!(((got - p) / sd).abs() < 4.0, "{pi}: {got} vs {p}");
    }
}

#[test]
fn unreversed_word_breaks_symmetry() {
    let w = word(2, &[0, 1]);
    let e = GeneratorWord::empty(2);
    let lhs = ctmc_distribution(2, 0.3, 1.0, &w, &e).unwrap();
    let rhs = pushforward_inverse(&ctmc_distribution(2, 0.3, 1.0, &e, &w).unwrap());
    assert!(tv_distance(&lhs, &rhs) > 1e-3);
}
