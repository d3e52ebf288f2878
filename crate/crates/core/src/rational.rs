//! Exact rate values and small helpers around [`BigRational`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Injection rate in (0, 1), held exactly.
///
/// Rates are parsed from decimal (`"0.75"`) or fraction (`"3/4"`) text, so
/// every rate that reaches the library is rational and the stationary-measure
/// identities can be checked with zero tolerance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rate(BigRational);

impl Rate {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_positive() && value < BigRational::one() {
            Ok(Rate(value))
        } else {
            Err(Error::InvalidRate(value.to_string()))
        }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Parse(format!("{numer}/{denom}")));
        }
        Rate::new(ratio(numer, denom))
    }

    /// Converts through the shortest decimal representation of `x`, so
    /// `0.4_f64` becomes exactly 2/5.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidRate(x.to_string()));
        }
        format!("{x}").parse()
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }

    /// True for the product-measure regime `alpha <= 1/2`.
    pub fn is_low_density(&self) -> bool {
        self.0 <= ratio(1, 2)
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rate::new(parse_exact(s)?)
    }
}

impl TryFrom<String> for Rate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Rate> for String {
    fn from(r: Rate) -> String {
        r.to_string()
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"-1.25"`, `"3"` or `"1e-3"` into an exact rational.
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(s.to_string());
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Binomial coefficient as an exact integer.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn pow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_exact("0.75").unwrap(), ratio(3, 4));
        assert_eq!(parse_exact("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_exact("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_exact("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_exact(".5").unwrap(), ratio(1, 2));
        assert!(parse_exact("abc").is_err());
        assert!(parse_exact("1/0").is_err());
    }

    #[test]
    fn rate_bounds() {
        assert!("1.2".parse::<Rate>().is_err());
        assert!("0".parse::<Rate>().is_err());
        assert!("1".parse::<Rate>().is_err());
        assert_eq!(Rate::from_f64(0.4).unwrap().value(), &ratio(2, 5));
        assert!(Rate::from_ratio(1, 2).unwrap().is_low_density());
        assert!(!Rate::from_ratio(3, 5).unwrap().is_low_density());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 4), BigInt::zero());
        assert_eq!(binomial(36, 18), BigInt::from(9_075_135_300_u64));
    }
}
