//! Stationary cylinder probabilities of the step-initialized half-line
//! open TASEP.
//!
//! For `alpha <= 1/2` the limit is Bernoulli(`alpha`) product measure. For
//! `alpha > 1/2` we use the matrix product state with `DE = c(D + E)`,
//! `alpha <w|E = c <w|`, `(D + E)|v> = |v>`, `<w|v> = 1` and `c = 1/4`; that
//! this state is the limit of the step process is an unproven assumption,
//! so every result in that regime carries [`CylinderProbability::assumes_conjecture`].
//!
//! A cylinder probability reduces to `sum_k Z_k <w|D^k|v>`, where `Z_k` is
//! the weight of all paths from the root of the DEHP tree to endpoint
//! `(k, 0)`. Along any such path every step carries weight `c` or `c/alpha`,
//! and the path length is `L - k`, so `Z_k = c^{L-k} P_k(1/alpha)` for a
//! polynomial `P_k` with nonnegative integer coefficients counting paths by
//! their number of one-child steps. The tree is never built; `P_k` is
//! accumulated node by node.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{pow, ratio, Rate};

/// Stationary current of the maximal-current phase.
pub fn current() -> BigRational {
    ratio(1, 4)
}

/// Occupation word `eta in {0,1}^L`, `L >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryWord(Vec<bool>);

impl BinaryWord {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("binary word must be nonempty".into()));
        }
        Ok(BinaryWord(bits))
    }

    /// Word of length `len` whose site `i + 1` is bit `i` of `mask`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!((1..=64).contains(&len));
        BinaryWord((0..len).map(|i| mask >> i & 1 == 1).collect())
    }

    /// All `2^len` words of length `len`.
    pub fn all(len: usize) -> impl Iterator<Item = BinaryWord> {
        assert!((1..=40).contains(&len));
        (0..1u64 << len).map(move |m| BinaryWord::from_mask(m, len))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn extended(&self, bit: bool) -> BinaryWord {
        let mut bits = self.0.clone();
        bits.push(bit);
        BinaryWord(bits)
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| match c {
                '0' | 'E' => Ok(false),
                '1' | 'D' => Ok(true),
                _ => Err(Error::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        BinaryWord::new(bits)
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Cluster statistics of a word.
///
/// `sigma[j-1]` is the length of the `j`-th cluster of ones, `tau[k]` the
/// length of the zero run before cluster `k + 1` (so `tau[0]` leads and
/// `tau[A]` trails), `psi[i-1] = Ψ_i` and `phi[j] = Φ_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterStats {
    pub len: usize,
    pub ell: usize,
    pub clusters: usize,
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub psi: Vec<usize>,
    pub phi: Vec<usize>,
}

impl ClusterStats {
    /// `Ψ_i` for `1 <= i <= A + 1`.
    pub fn psi(&self, i: usize) -> usize {
        self.psi[i - 1]
    }

    /// `Φ_j` for `0 <= j <= A + 1`.
    pub fn phi(&self, j: usize) -> usize {
        self.phi[j]
    }
}

pub fn cluster_stats(eta: &BinaryWord) -> ClusterStats {
    let mut sigma = Vec::new();
    let mut tau = vec![0usize];
    for (i, &b) in eta.bits().iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| eta.bits()[j]);
        if b {
            if prev == Some(true) {
                *sigma.last_mut().unwrap() += 1;
            } else {
                sigma.push(1);
            }
        } else {
            if prev == Some(true) {
                tau.push(0);
            }
            *tau.last_mut().unwrap() += 1;
        }
    }
    let clusters = sigma.len();
    // A word ending in ones has an empty trailing zero run.
    if tau.len() == clusters {
        tau.push(0);
    }
    let suffix = |v: &[usize]| -> Vec<usize> {
        let mut out = vec![0; v.len() + 1];
        for i in (0..v.len()).rev() {
            out[i] = out[i + 1] + v[i];
        }
        out
    };
    ClusterStats {
        len: eta.len(),
        ell: sigma.iter().sum(),
        clusters,
        psi: suffix(&sigma),
        phi: suffix(&tau),
        sigma,
        tau,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeKind {
    Endpoint,
    OneChild,
    TwoChildren,
    Outside,
}

fn classify(s: &ClusterStats, x: usize, y: usize) -> NodeKind {
    if y == 0 {
        return NodeKind::Endpoint;
    }
    let a = s.clusters;
    for i in 1..=a + 1 {
        if x == s.psi(i) && s.phi(i) < y && y <= s.phi(i - 1) {
            return NodeKind::OneChild;
        }
    }
    for i in 1..=a {
        if s.psi(i + 1) < x && x <= s.psi(i) && y <= s.phi(i) {
            return NodeKind::TwoChildren;
        }
    }
    NodeKind::Outside
}

/// Path counts `n[k][j]`: paths from the root to endpoint `(k, 0)` that use
/// exactly `j` one-child steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCounts {
    pub len: usize,
    pub counts: Vec<Vec<u64>>,
}

impl PathCounts {
    /// `Z_k = c^{L-k} sum_j n[k][j] (1/alpha)^j` for `c = 1/4`.
    pub fn partition(&self, alpha: &BigRational) -> Vec<BigRational> {
        let beta = alpha.recip();
        let c = current();
        self.counts
            .iter()
            .enumerate()
            .map(|(k, coeffs)| {
                let mut acc = BigRational::zero();
                for n in coeffs.iter().rev() {
                    acc = acc * &beta + BigRational::from_integer(BigInt::from(*n));
                }
                acc * pow(&c, self.len - k)
            })
            .collect()
    }
}

/// DEHP-tree path counts from the node membership rule, by dynamic
/// programming over the `(x, y)` lattice in decreasing `x + y`.
pub fn path_counts(eta: &BinaryWord) -> PathCounts {
    let s = cluster_stats(eta);
    let (x0, y0) = (s.psi(1), s.phi(0));
    let depth = y0 + 1;
    let idx = |x: usize, y: usize| (x * (y0 + 1) + y) * depth;
    let mut grid = vec![0u64; (x0 + 1) * (y0 + 1) * depth];
    grid[idx(x0, y0)] = 1;
    for level in (1..=x0 + y0).rev() {
        for x in level.saturating_sub(y0)..=x0.min(level) {
            let y = level - x;
            if y == 0 {
                continue;
            }
            let base = idx(x, y);
            if grid[base..base + depth].iter().all(|&n| n == 0) {
                continue;
            }
            match classify(&s, x, y) {
                NodeKind::OneChild => {
                    let child = idx(x, y - 1);
                    for j in 0..depth - 1 {
                        grid[child + j + 1] += grid[base + j];
                    }
                }
                NodeKind::TwoChildren => {
                    let (left, right) = (idx(x, y - 1), idx(x - 1, y));
                    for j in 0..depth {
                        let n = grid[base + j];
                        grid[left + j] += n;
                        grid[right + j] += n;
                    }
                }
                kind => unreachable!("reachable node ({x},{y}) classified {kind:?} for {eta}"),
            }
        }
    }
    let counts = (0..=x0)
        .map(|k| {
            let b = idx(k, 0);
            trim(grid[b..b + depth].to_vec())
        })
        .collect();
    PathCounts { len: eta.len(), counts }
}

/// Same counts from the layer-by-layer construction: a one-layer tree for
/// the leading zeros, then for each block `D^σ E^τ` every endpoint `(k, 0)`
/// restarts a one-layer tree at `(k + σ, τ)`.
pub fn path_counts_layered(eta: &BinaryWord) -> PathCounts {
    let s = cluster_stats(eta);
    // endpoint k -> coefficients by one-child count
    let mut ends: Vec<Vec<u64>> = vec![vec![0; s.len + 1]];
    ends[0][s.tau[0]] = 1;
    for i in 1..=s.clusters {
        let (sigma, tau) = (s.sigma[i - 1], s.tau[i]);
        let width = ends.len() + sigma;
        let mut layer = vec![vec![vec![0u64; s.len + 1]; tau + 1]; width];
        for (k, c) in ends.iter().enumerate() {
            add_into(&mut layer[k + sigma][tau], c);
        }
        for y in (1..=tau).rev() {
            for x in (0..width).rev() {
                let here = std::mem::take(&mut layer[x][y]);
                if here.iter().all(|&n| n == 0) {
                    layer[x][y] = here;
                    continue;
                }
                if x == 0 {
                    let shifted: Vec<u64> = std::iter::once(0).chain(here[..s.len].iter().copied()).collect();
                    add_into(&mut layer[0][y - 1], &shifted);
                } else {
                    add_into(&mut layer[x][y - 1], &here);
                    add_into(&mut layer[x - 1][y], &here);
                }
                layer[x][y] = here;
            }
        }
        ends = (0..width).map(|x| layer[x][0].clone()).collect();
    }
    PathCounts { len: s.len, counts: ends.into_iter().map(trim).collect() }
}

fn add_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

/// Endpoint partition functions `Z_0..Z_{Ψ_1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionVector {
    pub z: Vec<BigRational>,
    pub alpha: BigRational,
}

impl PartitionVector {
    /// `sum_k Z_k <w|D^k|v>`.
    pub fn cylinder(&self) -> BigRational {
        self.z.iter().enumerate().map(|(k, z)| z * wv_moment(k, &self.alpha)).sum()
    }
}

pub fn dehp_partition(eta: &BinaryWord, alpha: &Rate) -> PartitionVector {
    partition_at(eta, alpha.value())
}

fn partition_at(eta: &BinaryWord, alpha: &BigRational) -> PartitionVector {
    PartitionVector { z: path_counts(eta).partition(alpha), alpha: alpha.clone() }
}

/// `<w|D^k|v> = 2^{-k} (1 + k (alpha - 1/2) / alpha)`.
pub fn wv_moment(k: usize, alpha: &BigRational) -> BigRational {
    let half = ratio(1, 2);
    let slope = (alpha - &half) / alpha;
    (BigRational::one() + slope * BigRational::from_integer(BigInt::from(k))) * pow(&half, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bernoulli,
    Mpa,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderProbability {
    pub value: BigRational,
    pub regime: Regime,
    /// Set whenever the value relies on the matrix product state being the
    /// long-time limit of the step process.
    pub assumes_conjecture: bool,
}

impl CylinderProbability {
    fn mpa(value: BigRational) -> Self {
        CylinderProbability { value, regime: Regime::Mpa, assumes_conjecture: true }
    }
}

/// Stationary probability that the first `L` sites read `eta`.
pub fn stationary_prob(eta: &BinaryWord, alpha: &Rate) -> CylinderProbability {
    if alpha.is_low_density() {
        CylinderProbability {
            value: bernoulli_prob(eta, alpha.value()),
            regime: Regime::Bernoulli,
            assumes_conjecture: false,
        }
    } else {
        CylinderProbability::mpa(mpa_value(eta, alpha.value()))
    }
}

/// The matrix-product formula evaluated at any `alpha` in (0, 1), including
/// the product-measure regime.
pub fn mpa_value(eta: &BinaryWord, alpha: &BigRational) -> BigRational {
    partition_at(eta, alpha).cylinder()
}

pub fn bernoulli_prob(eta: &BinaryWord, alpha: &BigRational) -> BigRational {
    let ones = eta.ones();
    pow(alpha, ones) * pow(&(BigRational::one() - alpha), eta.len() - ones)
}

/// Reduces `<w| prod (eta_x D + (1 - eta_x) E) |v>` by rewriting words with
/// `DE -> c D + c E` and `<w|E -> (c/alpha) <w|` until only powers of `D`
/// remain, then evaluates them with [`wv_moment`].
pub fn rewrite_oracle(eta: &BinaryWord, alpha: &Rate) -> CylinderProbability {
    CylinderProbability::mpa(rewrite_value(eta, alpha.value()))
}

pub fn rewrite_value(eta: &BinaryWord, alpha: &BigRational) -> BigRational {
    let c = current();
    let c_over_alpha = &c / alpha;
    let mut level: HashMap<Vec<bool>, BigRational> = HashMap::new();
    level.insert(eta.bits().to_vec(), BigRational::one());
    let mut total = BigRational::zero();
    while !level.is_empty() {
        let mut next: HashMap<Vec<bool>, BigRational> = HashMap::new();
        let mut emit = |w: Vec<bool>, coef: BigRational| {
            *next.entry(w).or_insert_with(BigRational::zero) += coef;
        };
        for (word, coef) in level {
            if word.iter().all(|&d| d) {
                total += coef * wv_moment(word.len(), alpha);
            } else if !word[0] {
                emit(word[1..].to_vec(), coef * &c_over_alpha);
            } else {
                let i = (0..word.len() - 1)
                    .find(|&i| word[i] && !word[i + 1])
                    .expect("a word starting with D that is not all D contains DE");
                let mut keep_d = word.clone();
                keep_d.remove(i + 1);
                let mut keep_e = word;
                keep_e.remove(i);
                emit(keep_d, &coef * &c);
                emit(keep_e, coef * &c);
            }
        }
        level = next;
    }
    total
}

/// `mu(eta) = 2^{-scale} sum_j coeffs[j] (1/alpha)^j` in the matrix-product
/// regime. Sums over words of a common length stay in this form, so a law
/// over `2^L` words costs one exact evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaPolynomial {
    scale: u32,
    coeffs: Vec<i128>,
}

impl BetaPolynomial {
    pub fn zero(len: usize) -> Self {
        BetaPolynomial { scale: 2 * len as u32 + 1, coeffs: Vec::new() }
    }

    pub fn add(&mut self, other: &BetaPolynomial) {
        assert_eq!(self.scale, other.scale, "words of different length");
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn evaluate(&self, alpha: &BigRational) -> BigRational {
        let beta = alpha.recip();
        let mut acc = BigRational::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc * &beta + BigRational::from_integer(BigInt::from(*a));
        }
        acc / BigRational::from_integer(BigInt::one() << self.scale)
    }
}

/// Uses `Z_k 2^{-k} (1 + k (alpha - 1/2)/alpha)
///   = 2^{k - 2L} P_k(beta) (1 + k - k beta / 2)` with `beta = 1/alpha`.
pub fn mpa_polynomial(eta: &BinaryWord) -> BetaPolynomial {
    let pc = path_counts(eta);
    let mut out = BetaPolynomial::zero(eta.len());
    let degree = pc.counts.iter().map(Vec::len).max().unwrap_or(1) + 1;
    out.coeffs = vec![0; degree];
    for (k, coeffs) in pc.counts.iter().enumerate() {
        let k128 = k as i128;
        for (j, &n) in coeffs.iter().enumerate() {
            let n = n as i128;
            out.coeffs[j] += (n << (k + 1)) * (1 + k128);
            out.coeffs[j + 1] -= (n << k) * k128;
        }
    }
    out
}
