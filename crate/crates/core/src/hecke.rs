//! Signed permutations, the 0-Hecke action of the type-B Coxeter
//! generators and the continuous-time random walk it drives.
//!
//! Generators act on positions: `s_k` (k >= 1) swaps one-line entries `k`
//! and `k + 1`, and `s_0` negates entry 1. A word `(a_1, ..., a_p)` stands
//! for the product `s_{a_1} ... s_{a_p}`, so acting on the identity one
//! applies `a_p` first.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_CACHE_RANK: usize = 5;
pub const MAX_CTMC_RANK: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignedPermutation {
    images: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation { images: (1..=n as i8).collect() }
    }

    /// `images[i - 1] = π(i)`.
    pub fn from_images(images: Vec<i8>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            let a = v.unsigned_abs() as usize;
            if a == 0 || a > n || seen[a] {
                return Err(Error::InvalidParameter(format!("{images:?} is not a signed permutation")));
            }
            seen[a] = true;
        }
        Ok(SignedPermutation { images })
    }

    /// The product `s_{a_1} ... s_{a_p}`.
    pub fn from_word(word: &GeneratorWord) -> Self {
        let mut pi = SignedPermutation::identity(word.n);
        for &k in word.letters.iter().rev() {
            pi = pi.apply_generator(k);
        }
        pi
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[i8] {
        &self.images
    }

    /// `s_k · π`.
    pub fn apply_generator(&self, k: usize) -> Self {
        let mut images = self.images.clone();
        if k == 0 {
            images[0] = -images[0];
        } else {
            images.swap(k - 1, k);
        }
        SignedPermutation { images }
    }

    /// Whether `s_k · π` is one longer than `π`.
    pub fn ascends(&self, k: usize) -> bool {
        if k == 0 {
            self.images[0] > 0
        } else {
            self.images[k - 1] < self.images[k]
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0i8; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            let pos = (i + 1) as i8;
            images[v.unsigned_abs() as usize - 1] = if v > 0 { pos } else { -pos };
        }
        SignedPermutation { images }
    }

    pub fn all(n: usize) -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        let mut perm: Vec<i8> = (1..=n as i8).collect();
        permutations(&mut perm, 0, &mut |p| {
            for signs in 0u32..1 << n {
                let images = p.iter().enumerate().map(|(i, &v)| if signs >> i & 1 == 1 { -v } else { v });
                out.push(SignedPermutation { images: images.collect() });
            }
        });
        out.sort();
        out
    }
}

fn permutations(v: &mut Vec<i8>, start: usize, f: &mut impl FnMut(&[i8])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permutations(v, start + 1, f);
        v.swap(start, i);
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(i8::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GeneratorWord {
    pub n: usize,
    pub letters: Vec<usize>,
}

impl GeneratorWord {
    pub fn new(n: usize, letters: Vec<usize>) -> Result<Self> {
        if n == 0 || n > i8::MAX as usize {
            return Err(Error::RankTooLarge(n));
        }
        if let Some(&k) = letters.iter().find(|&&k| k >= n) {
            return Err(Error::OutOfRange { value: k, max: n - 1 });
        }
        Ok(GeneratorWord { n, letters })
    }

    pub fn empty(n: usize) -> Self {
        GeneratorWord { n, letters: Vec::new() }
    }

    pub fn reversed(&self) -> Self {
        GeneratorWord { n: self.n, letters: self.letters.iter().rev().copied().collect() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Lengths of all of `B_n` by breadth-first search on the Cayley graph.
#[derive(Debug)]
pub struct LengthCache {
    n: usize,
    lengths: HashMap<SignedPermutation, u32>,
}

impl LengthCache {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_CACHE_RANK {
            return Err(Error::RankTooLarge(n));
        }
        let id = SignedPermutation::identity(n);
        let mut lengths = HashMap::from([(id.clone(), 0)]);
        let mut queue = VecDeque::from([id]);
        while let Some(pi) = queue.pop_front() {
            let d = lengths[&pi];
            for k in 0..n {
                let next = pi.apply_generator(k);
                if !lengths.contains_key(&next) {
                    lengths.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
        Ok(LengthCache { n, lengths })
    }

    /// Shared cache for rank `n`.
    pub fn shared(n: usize) -> Result<Arc<LengthCache>> {
        static CACHES: OnceLock<Mutex<HashMap<usize, Arc<LengthCache>>>> = OnceLock::new();
        let caches = CACHES.get_or_init(Default::default);
        if let Some(c) = caches.lock().unwrap().get(&n) {
            return Ok(c.clone());
        }
        let cache = Arc::new(LengthCache::new(n)?);
        caches.lock().unwrap().insert(n, cache.clone());
        Ok(cache)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn get(&self, pi: &SignedPermutation) -> u32 {
        self.lengths[pi]
    }
}

pub fn length(pi: &SignedPermutation) -> Result<u32> {
    Ok(LengthCache::shared(pi.rank())?.get(pi))
}

/// `T_{s_k} T_π`: `s_k π` if that is longer, otherwise `π`.
pub fn hecke_apply(pi: &SignedPermutation, k: usize) -> SignedPermutation {
    assert!(k < pi.rank(), "generator s_{k} out of range for rank {}", pi.rank());
    if pi.ascends(k) {
        pi.apply_generator(k)
    } else {
        pi.clone()
    }
}

fn hecke_word(mut pi: SignedPermutation, word: &GeneratorWord) -> SignedPermutation {
    for &k in &word.letters {
        pi = hecke_apply(&pi, k);
    }
    pi
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionTable {
    pub weights: BTreeMap<SignedPermutation, f64>,
    /// Upper bound on the total-variation error of `weights`.
    pub truncation: f64,
}

impl DistributionTable {
    pub fn point_mass(pi: SignedPermutation) -> Self {
        DistributionTable { weights: BTreeMap::from([(pi, 1.0)]), truncation: 0.0 }
    }

    pub fn prob(&self, pi: &SignedPermutation) -> f64 {
        self.weights.get(pi).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

fn check_walk(n: usize, alpha: f64, t: f64) -> Result<()> {
    if n == 0 || n > MAX_CTMC_RANK {
        return Err(Error::RankTooLarge(n));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidRate(alpha.to_string()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

/// Exact law of: Hecke-apply `pre` to the identity letter by letter, run the
/// walk (rate `alpha` for `s_0`, rate 1 for each `s_k`, k >= 1) for time
/// `t`, then Hecke-apply `post` letter by letter.
pub fn ctmc_distribution(
    n: usize,
    alpha: f64,
    t: f64,
    pre: &GeneratorWord,
    post: &GeneratorWord,
) -> Result<DistributionTable> {
    check_walk(n, alpha, t)?;
    if pre.n != n || post.n != n {
        return Err(Error::InvalidParameter("word rank differs from walk rank".into()));
    }
    let states = SignedPermutation::all(n);
    let index: HashMap<&SignedPermutation, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let lambda = alpha + (n - 1) as f64;
    let moves: Vec<Vec<(usize, f64)>> = states
        .iter()
        .map(|s| {
            (0..n)
                .map(|k| {
                    let rate = if k == 0 { alpha } else { 1.0 };
                    (index[&hecke_apply(s, k)], rate / lambda)
                })
                .collect()
        })
        .collect();

    let mut v = vec![0.0; states.len()];
    v[index[&hecke_word(SignedPermutation::identity(n), pre)]] = 1.0;
    let mean = lambda * t;
    let mut term = (-mean).exp();
    let mut remaining = 1.0 - term;
    let mut acc: Vec<f64> = v.iter().map(|p| p * term).collect();
    let mut j = 0u64;
    const TOL: f64 = 1e-13;
    while remaining > TOL {
        let mut next = vec![0.0; states.len()];
        for (i, &p) in v.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut stay = 1.0;
            for &(to, w) in &moves[i] {
                next[to] += p * w;
                stay -= w;
            }
            next[i] += p * stay;
        }
        v = next;
        j += 1;
        term *= mean / j as f64;
        remaining -= term;
        for (a, p) in acc.iter_mut().zip(&v) {
            *a += p * term;
        }
        if j > 100_000 {
            return Err(Error::Truncation { bound: remaining, tolerance: TOL });
        }
    }
    let mut weights = BTreeMap::new();
    for (s, p) in states.into_iter().zip(acc) {
        if p > 0.0 {
            *weights.entry(hecke_word(s, post)).or_insert(0.0) += p;
        }
    }
    Ok(DistributionTable { weights, truncation: remaining.max(0.0) })
}

pub fn pushforward_inverse(table: &DistributionTable) -> DistributionTable {
    let mut weights = BTreeMap::new();
    for (pi, &p) in &table.weights {
        *weights.entry(pi.inverse()).or_insert(0.0) += p;
    }
    DistributionTable { weights, truncation: table.truncation }
}

pub fn tv_distance(a: &DistributionTable, b: &DistributionTable) -> f64 {
    let mut keys: Vec<&SignedPermutation> = a.weights.keys().chain(b.weights.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.into_iter().map(|k| (a.prob(k) - b.prob(k)).abs()).sum::<f64>()
}

/// Distance between the walk started from `word` and the inverse of the
/// walk followed by `word` reversed; zero up to truncation when the
/// color-position symmetry holds.
pub fn symmetry_check(n: usize, alpha: f64, t: f64, word: &GeneratorWord) -> Result<f64> {
    let empty = GeneratorWord::empty(n);
    let lhs = ctmc_distribution(n, alpha, t, word, &empty)?;
    let rhs = pushforward_inverse(&ctmc_distribution(n, alpha, t, &empty, &word.reversed())?);
    Ok(tv_distance(&lhs, &rhs))
}

/// Samples the walk for time `t` from the identity.
pub fn sample_walk<R: Rng + ?Sized>(n: usize, alpha: f64, t: f64, rng: &mut R) -> SignedPermutation {
    let lambda = alpha + (n - 1) as f64;
    let mut pi = SignedPermutation::identity(n);
    let mut clock = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        clock += e / lambda;
        if clock > t {
            return pi;
        }
        let u = rng.random::<f64>() * lambda;
        let k = if u < alpha { 0 } else { 1 + ((u - alpha) as usize).min(n - 2) };
        pi = hecke_apply(&pi, k);
    }
}

/// Type-B length from one-line notation: inversions plus the absolute values
/// of the negative entries.
pub fn length_by_inversions(pi: &SignedPermutation) -> u32 {
    let w = pi.images();
    let mut inv = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                inv += 1;
            }
        }
    }
    let neg: u32 = w.iter().filter(|&&v| v < 0).map(|&v| v.unsigned_abs() as u32).sum();
    inv + neg
}

/// A minimal word for the reversal `i -> M1 + M2 + 2 - i` of the window
/// `[1, M1 + M2 + 1]` built from adjacent transpositions only.
pub fn reduced_word_reversal(m1: usize, m2: usize) -> Result<GeneratorWord> {
    let n = m1 + m2 + 1;
    let mut letters = Vec::new();
    for pass in 0..n.saturating_sub(1) {
        letters.extend(1..n - pass);
    }
    let word = GeneratorWord::new(n, letters)?;
    let pi = SignedPermutation::from_word(&word);
    let target = SignedPermutation { images: (1..=n as i8).rev().collect() };
    let expected = if n <= MAX_CACHE_RANK { length(&pi)? } else { length_by_inversions(&pi) };
    if pi != target || word.len() != expected as usize {
        return Err(Error::NotMinimal(word.letters));
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(n: usize, l: &[usize]) -> GeneratorWord {
        GeneratorWord::new(n, l.to_vec()).unwrap()
    }

    #[test]
    fn small_lengths() {
        let id = SignedPermutation::identity(3);
        assert_eq!(length(&id).unwrap(), 0);
        assert_eq!(length(&id.apply_generator(0)).unwrap(), 1);
        assert_eq!(LengthCache::new(3).unwrap().len(), 48);
        assert!(matches!(LengthCache::new(6), Err(Error::RankTooLarge(6))));
    }

    #[test]
    fn hecke_examples() {
        let id = SignedPermutation::identity(2);
        let s0 = hecke_apply(&id, 0);
        assert_eq!(s0.images(), &[-1, 2]);
        assert_eq!(hecke_apply(&s0, 0), s0);
    }

    #[test]
    fn inverse_of_product() {
        let a = SignedPermutation::from_word(&word(2, &[0, 1]));
        assert_eq!(a.inverse(), SignedPermutation::from_word(&word(2, &[1, 0])));
    }

    #[test]
    fn point_masses_at_zero_time() {
        let e = GeneratorWord::empty(3);
        let t = ctmc_distribution(3, 0.4, 0.0, &e, &e).unwrap();
        assert_eq!(t, DistributionTable::point_mass(SignedPermutation::identity(3)));
        let t = ctmc_distribution(3, 0.4, 0.0, &word(3, &[0]), &e).unwrap();
        assert_eq!(t.prob(&SignedPermutation::identity(3).apply_generator(0)), 1.0);
    }

    #[test]
    fn reversal_words() {
        assert!(reduced_word_reversal(0, 0).unwrap().is_empty());
        assert_eq!(reduced_word_reversal(1, 0).unwrap().letters, vec![1]);
        assert_eq!(reduced_word_reversal(1, 1).unwrap().len(), 3);
        assert_eq!(reduced_word_reversal(4, 3).unwrap().len(), 28);
    }
}
