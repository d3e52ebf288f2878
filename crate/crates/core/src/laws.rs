//! Long-time laws of the shock observables and the finite-time identity
//! functionals that express them through the step-process current.
//!
//! Every law is a sum of the stationary measure over words of length `L`
//! grouped by the number of ones in a leading block of length `split` and in
//! the trailing block. For `alpha <= 1/2` the groups have binomial weight; for
//! `alpha > 1/2` the grouped sums come from the matrix product state and are
//! only available for `L <= ENUMERATION_CAP`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::dehp::{mpa_polynomial, BetaPolynomial, BinaryWord, Regime};
use crate::error::{Error, Result};
use crate::rational::{binomial, pow, Rate};

pub const ENUMERATION_CAP: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawFamily {
    OneShockExist,
    OneShockHeight,
    TwoShockExist,
    TwoShockHeight3,
}

impl LawFamily {
    pub fn name(self) -> &'static str {
        match self {
            LawFamily::OneShockExist => "one_shock_exist",
            LawFamily::OneShockHeight => "one_shock_height",
            LawFamily::TwoShockExist => "two_shock_exist",
            LawFamily::TwoShockHeight3 => "two_shock_height3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "one_shock_exist" => LawFamily::OneShockExist,
            "one_shock_height" => LawFamily::OneShockHeight,
            "two_shock_exist" => LawFamily::TwoShockExist,
            "two_shock_height3" => LawFamily::TwoShockHeight3,
            _ => return Err(Error::Parse(format!("unknown law family {s:?}"))),
        })
    }
}

/// A law evaluation request. `params` is `(M1, M2)` for one-shock families
/// and `(N, M)` for two-shock families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawQuery {
    pub family: LawFamily,
    pub params: (usize, usize),
    pub argument: Option<usize>,
    pub alpha: Rate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawValue {
    pub value: BigRational,
    pub regime: Regime,
    pub assumes_conjecture: bool,
}

impl LawQuery {
    pub fn evaluate(&self) -> Result<LawValue> {
        self.evaluate_in(regime_of(&self.alpha))
    }

    /// Evaluates with the formula of the given regime regardless of `alpha`.
    pub fn evaluate_in(&self, regime: Regime) -> Result<LawValue> {
        let (p, q) = self.params;
        let arg = || {
            self.argument
                .ok_or_else(|| Error::InvalidParameter(format!("{} needs an argument", self.family.name())))
        };
        let cells = match self.family {
            LawFamily::OneShockExist => one_shock_exist_cells(p, q),
            LawFamily::OneShockHeight => one_shock_height_cells(arg()?, p, q)?,
            LawFamily::TwoShockExist => two_shock_exist_cells(p, q),
            LawFamily::TwoShockHeight3 => two_shock_height3_cells(arg()?, p, q)?,
        };
        cells.evaluate(self.alpha.value(), regime)
    }
}

fn regime_of(alpha: &Rate) -> Regime {
    if alpha.is_low_density() {
        Regime::Bernoulli
    } else {
        Regime::Mpa
    }
}

/// A set of `(ones in [1, split], ones in [split + 1, len])` cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    pub len: usize,
    pub split: usize,
    pub cells: Vec<(usize, usize)>,
}

impl CellSet {
    pub fn evaluate(&self, alpha: &BigRational, regime: Regime) -> Result<LawValue> {
        let value = match regime {
            Regime::Bernoulli => self.bernoulli(alpha),
            Regime::Mpa => self.mpa(alpha)?,
        };
        Ok(LawValue { value, regime, assumes_conjecture: regime == Regime::Mpa })
    }

    fn bernoulli(&self, alpha: &BigRational) -> BigRational {
        let q = BigRational::one() - alpha;
        let rest = self.len - self.split;
        self.cells
            .iter()
            .map(|&(a, b)| {
                let w = binomial(self.split, a) * binomial(rest, b);
                BigRational::from_integer(w) * pow(alpha, a + b) * pow(&q, self.len - a - b)
            })
            .sum()
    }

    fn mpa(&self, alpha: &BigRational) -> Result<BigRational> {
        let table = grouped_polynomials(self.len, self.split)?;
        let mut total = BetaPolynomial::zero(self.len);
        for &(a, b) in &self.cells {
            total.add(&table[a][b]);
        }
        Ok(total.evaluate(alpha))
    }
}

type GroupTable = Vec<Vec<BetaPolynomial>>;

type GroupCache = HashMap<(usize, usize), Arc<GroupTable>>;

/// Matrix-product polynomials summed over each `(a, b)` group of words.
pub fn grouped_polynomials(len: usize, split: usize) -> Result<Arc<GroupTable>> {
    if len == 0 || len > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { sites: len, cap: ENUMERATION_CAP });
    }
    assert!(split <= len);
    static CACHE: OnceLock<Mutex<GroupCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(len, split)) {
        return Ok(t.clone());
    }
    let table = Arc::new(build_groups(len, split));
    cache.lock().unwrap().insert((len, split), table.clone());
    Ok(table)
}

fn empty_groups(len: usize, split: usize) -> GroupTable {
    vec![vec![BetaPolynomial::zero(len); len - split + 1]; split + 1]
}

fn accumulate(len: usize, split: usize, masks: impl Iterator<Item = u64>) -> GroupTable {
    let mut table = empty_groups(len, split);
    let low = (1u64 << split) - 1;
    for mask in masks {
        let a = (mask & low).count_ones() as usize;
        let b = (mask >> split).count_ones() as usize;
        table[a][b].add(&mpa_polynomial(&BinaryWord::from_mask(mask, len)));
    }
    table
}

#[cfg(feature = "parallel")]
fn build_groups(len: usize, split: usize) -> GroupTable {
    use rayon::prelude::*;
    let chunks = 64u64.min(1 << len);
    let per = (1u64 << len) / chunks;
    (0..chunks).into_par_iter().map(|c| accumulate(len, split, c * per..(c + 1) * per)).reduce(
        || empty_groups(len, split),
        |mut x, y| {
            for (rx, ry) in x.iter_mut().zip(&y) {
                for (px, py) in rx.iter_mut().zip(ry) {
                    px.add(py);
                }
            }
            x
        },
    )
}

#[cfg(not(feature = "parallel"))]
fn build_groups(len: usize, split: usize) -> GroupTable {
    accumulate(len, split, 0..1u64 << len)
}

fn check_arg(value: usize, max: usize) -> Result<()> {
    if value > max {
        return Err(Error::OutOfRange { value, max });
    }
    Ok(())
}

fn one_shock_exist_cells(m1: usize, m2: usize) -> CellSet {
    let len = m1 + m2 + 1;
    CellSet { len, split: len, cells: (0..=m1).map(|n| (n, 0)).collect() }
}

fn one_shock_height_cells(m: usize, m1: usize, m2: usize) -> Result<CellSet> {
    check_arg(m, m2)?;
    let len = m1 + m2 + 1;
    Ok(CellSet { len, split: len, cells: vec![(len - m, 0)] })
}

fn two_shock_exist_cells(n: usize, m: usize) -> CellSet {
    let mut cells = Vec::new();
    for a in 0..n {
        for b in 0..=m + n - a {
            cells.push((a, b));
        }
    }
    for a in n..=m + n {
        for b in 0..=m {
            cells.push((a, b));
        }
    }
    CellSet { len: 2 * m + 2 * n + 1, split: m + n, cells }
}

fn two_shock_height3_cells(s: usize, n: usize, m: usize) -> Result<CellSet> {
    check_arg(s, n)?;
    let mut cells: Vec<(usize, usize)> = (1..=s).map(|i| (n - i, m + n + 1 - s + i)).collect();
    cells.extend((n..=m + n).map(|a| (a, m + n + 1 - s)));
    Ok(CellSet { len: 2 * m + 2 * n + 1, split: m + n, cells })
}

/// Long-time probability that the second-class particle of the one-shock
/// process is still in the system.
pub fn p_exist_one_shock(m1: usize, m2: usize, alpha: &Rate) -> Result<LawValue> {
    one_shock_exist_cells(m1, m2).evaluate(alpha.value(), regime_of(alpha))
}

/// Long-time probability that `m` second-class particles remain, `0 <= m <= M2`.
pub fn p_height_one_shock(m: usize, m1: usize, m2: usize, alpha: &Rate) -> Result<LawValue> {
    one_shock_height_cells(m, m1, m2)?.evaluate(alpha.value(), regime_of(alpha))
}

/// The capped top value `m = M2 + 1`, as the complement of `0..=M2`.
pub fn p_height_one_shock_top(m1: usize, m2: usize, alpha: &Rate) -> Result<LawValue> {
    let len = m1 + m2 + 1;
    let cells = CellSet { len, split: len, cells: (0..=m1).map(|n| (n, 0)).collect() };
    cells.evaluate(alpha.value(), regime_of(alpha))
}

pub fn p_exist_two_shock(n: usize, m: usize, alpha: &Rate) -> Result<LawValue> {
    two_shock_exist_cells(n, m).evaluate(alpha.value(), regime_of(alpha))
}

/// Long-time probability that `s` third-class particles remain, `0 <= s <= N`.
pub fn p_height3_two_shock(s: usize, n: usize, m: usize, alpha: &Rate) -> Result<LawValue> {
    two_shock_height3_cells(s, n, m)?.evaluate(alpha.value(), regime_of(alpha))
}

/// The capped top value `s = N + 1`, as the complement of `0..=N`.
pub fn p_height3_two_shock_top(n: usize, m: usize, alpha: &Rate) -> Result<LawValue> {
    let mut rest = BigRational::one();
    let mut last = None;
    for s in 0..=n {
        let v = p_height3_two_shock(s, n, m, alpha)?;
        rest -= &v.value;
        last = Some(v);
    }
    let last = last.expect("0..=n is nonempty");
    Ok(LawValue { value: rest, regime: last.regime, assumes_conjecture: last.assumes_conjecture })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum IdentityFamily {
    /// Disappearance of the one-shock second-class particle.
    OneShockExit { m1: usize, m2: usize },
    /// `(N1, N2)` of the one-shock multi-species process.
    OneShockHeights { m1: usize, m2: usize },
    /// Disappearance of the two-shock second-class particle.
    TwoShockExit { n: usize, m: usize },
    /// `(N1, N2, N3)` of the two-shock multi-species process.
    TwoShockHeights { n: usize, m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityValue {
    Indicator(bool),
    Pair(u64, u64),
    Triple(u64, u64, u64),
}

impl IdentityFamily {
    /// Sites `x` whose step currents `𝒩(x, t)` the functional reads, in order.
    pub fn sites(self) -> Vec<usize> {
        match self {
            IdentityFamily::OneShockExit { m1, m2 } | IdentityFamily::OneShockHeights { m1, m2 } => {
                vec![1, m1 + m2 + 2]
            }
            IdentityFamily::TwoShockExit { n, m } | IdentityFamily::TwoShockHeights { n, m } => {
                vec![1, n + m + 1, 2 * n + 2 * m + 2]
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IdentityFamily::OneShockExit { .. } => "one_shock_exit",
            IdentityFamily::OneShockHeights { .. } => "one_shock_heights",
            IdentityFamily::TwoShockExit { .. } => "two_shock_exit",
            IdentityFamily::TwoShockHeights { .. } => "two_shock_heights",
        }
    }

    /// Panics unless `currents.len() == self.sites().len()`.
    pub fn evaluate(self, currents: &[u64]) -> IdentityValue {
        assert_eq!(currents.len(), self.sites().len(), "{} current count", self.name());
        let c = |i: usize| currents[i] as i64;
        let u = |v: i64| v.max(0) as u64;
        match self {
            IdentityFamily::OneShockExit { m1, .. } => IdentityValue::Indicator(c(0) - c(1) > m1 as i64),
            IdentityFamily::OneShockHeights { m1, m2 } => {
                let len = (m1 + m2 + 1) as i64;
                IdentityValue::Pair(currents[0], u((len - c(0) + c(1)).min(m2 as i64 + 1)))
            }
            IdentityFamily::TwoShockExit { n, m } => {
                let (n, m) = (n as i64, m as i64);
                let lhs = c(1) - c(2) + n.min(c(0) - c(1));
                IdentityValue::Indicator(lhs > n + m)
            }
            IdentityFamily::TwoShockHeights { n, m } => {
                let (n, m) = (n as i64, m as i64);
                let second = m.min(m + n - c(0) + c(1));
                let third = (n + 1).min(m + n + 1 - c(1) + c(2) + 0.max(n - c(0) + c(1)));
                IdentityValue::Triple(currents[0], u(second), u(third))
            }
        }
    }
}

/// An identity family applied to currents read off one trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFunctional {
    pub family: IdentityFamily,
    pub currents: Vec<u64>,
}

pub fn identity_rhs(functional: &IdentityFunctional) -> Result<IdentityValue> {
    let expected = functional.family.sites().len();
    if functional.currents.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "{} takes {expected} currents, got {}",
            functional.family.name(),
            functional.currents.len()
        )));
    }
    Ok(functional.family.evaluate(&functional.currents))
}

/// Total law mass over `0..=M2` plus the capped top value; exactly 1.
pub fn one_shock_height_total(m1: usize, m2: usize, alpha: &Rate) -> Result<BigRational> {
    let mut total = p_height_one_shock_top(m1, m2, alpha)?.value;
    for m in 0..=m2 {
        total += p_height_one_shock(m, m1, m2, alpha)?.value;
    }
    Ok(total)
}
