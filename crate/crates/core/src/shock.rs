//! Shock initial conditions, second-class tracking and observables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{IdentityFamily, IdentityValue};
use crate::tasep::{Color, SiteConfiguration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneShockVariant {
    /// Holes on `[1, M1]`, one second-class particle at `M1 + 1`, first-class
    /// particles on `[M1 + 2, M1 + M2 + 1]`.
    Eta,
    /// Holes on `[1, M1]`, second-class particles on `[M1 + 1, M1 + M2 + 1]`.
    EtaTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneShockSpec {
    pub m1: usize,
    pub m2: usize,
    pub variant: OneShockVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoShockVariant {
    /// `N` holes, `M` first-class, `M` holes, one second-class particle,
    /// `N` first-class.
    Xi,
    /// `N` holes, `M` second-class, `M` holes, `N + 1` third-class.
    XiTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoShockSpec {
    pub n: usize,
    pub m: usize,
    pub variant: TwoShockVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCondition {
    OneShock(OneShockSpec),
    TwoShock(TwoShockSpec),
    /// Empty lattice; every particle comes from the reservoir.
    Step,
}

impl InitialCondition {
    /// Number of sites the initial window describes.
    pub fn window_len(&self) -> usize {
        match *self {
            InitialCondition::OneShock(s) => s.m1 + s.m2 + 1,
            InitialCondition::TwoShock(s) => 2 * s.n + 2 * s.m + 1,
            InitialCondition::Step => 0,
        }
    }
}

pub fn build_initial(ic: &InitialCondition) -> SiteConfiguration {
    use Color as C;
    let mut w = Vec::with_capacity(ic.window_len());
    let mut run = |c: Color, k: usize| w.extend(std::iter::repeat_n(c, k));
    match *ic {
        InitialCondition::OneShock(OneShockSpec { m1, m2, variant }) => {
            run(C::HOLE, m1);
            match variant {
                OneShockVariant::Eta => {
                    run(C::SECOND, 1);
                    run(C::FIRST, m2);
                }
                OneShockVariant::EtaTilde => run(C::SECOND, m2 + 1),
            }
        }
        InitialCondition::TwoShock(TwoShockSpec { n, m, variant }) => {
            run(C::HOLE, n);
            match variant {
                TwoShockVariant::Xi => {
                    run(C::FIRST, m);
                    run(C::HOLE, m);
                    run(C::SECOND, 1);
                    run(C::FIRST, n);
                }
                TwoShockVariant::XiTilde => {
                    run(C::SECOND, m);
                    run(C::HOLE, m);
                    run(C::THIRD, n + 1);
                }
            }
        }
        InitialCondition::Step => {}
    }
    SiteConfiguration::from_window(w)
}

/// Where the unique second-class particle is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SecondClassPosition {
    At(usize),
    Exited,
}

/// Locates the unique second-class particle of an η- or ξ-type run.
pub fn track_f(cfg: &SiteConfiguration) -> Result<SecondClassPosition> {
    let inside: Vec<usize> =
        cfg.window().iter().enumerate().filter(|(_, &c)| c == Color::SECOND).map(|(i, _)| i + 1).collect();
    let exited = cfg.exited(Color::SECOND) as usize;
    match (inside.as_slice(), exited) {
        ([x], 0) => Ok(SecondClassPosition::At(*x)),
        ([], 1) => Ok(SecondClassPosition::Exited),
        _ => Err(Error::SecondClassMultiplicity(inside.len() + exited)),
    }
}

/// Number of particles of `color` on sites `z >= x`.
pub fn height_count(cfg: &SiteConfiguration, color: Color, x: usize) -> usize {
    assert!(x >= 1, "sites start at 1");
    cfg.window().iter().skip(x - 1).filter(|&&c| c == color).count()
}

/// KPZ-scaling experiment: rate `(1 + 2^{4/3} varpi t^{-1/3}) / 2` and block
/// size `floor(a t^{2/3})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpzScalingSpec {
    pub a: f64,
    pub varpi: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KpzParameters {
    pub alpha: f64,
    pub block: usize,
}

pub fn kpz_parameters(spec: &KpzScalingSpec) -> Result<KpzParameters> {
    let KpzScalingSpec { a, varpi, t } = *spec;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
    }
    if !(t > 0.0 && t.is_finite()) || !varpi.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    let alpha = 0.5 * (1.0 + 2f64.powf(4.0 / 3.0) * varpi * t.powf(-1.0 / 3.0));
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidRate(alpha.to_string()));
    }
    Ok(KpzParameters { alpha, block: floor_two_thirds(a, t) })
}

/// `floor(a * t^{2/3})`, i.e. the largest `b` with `b^3 <= a^3 t^2`.
fn floor_two_thirds(a: f64, t: f64) -> usize {
    let target = a.powi(3) * t * t;
    let mut b = target.cbrt().floor().max(0.0);
    while (b + 1.0).powi(3) <= target {
        b += 1.0;
    }
    while b > 0.0 && b.powi(3) > target {
        b -= 1.0;
    }
    b as usize
}

/// Value of an observable in one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Exited,
    Value(i64),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Exited => f.write_str("exited"),
            Outcome::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Quantities read off a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// Site of the unique second-class particle (`f(t)` or `g(t)`).
    SecondClassSite,
    /// 1 when the unique second-class particle has left, else 0.
    SecondClassExited,
    /// Particles of a color weakly right of `x`; color 1 on the step
    /// process is the current `𝒩(x, t)`.
    Height { color: Color, x: usize },
    /// One coordinate of an identity functional of the step current.
    StepIdentity { family: IdentityFamily, coordinate: usize },
}

impl Observable {
    pub fn observe(&self, cfg: &SiteConfiguration) -> Result<Outcome> {
        Ok(match *self {
            Observable::SecondClassSite => match track_f(cfg)? {
                SecondClassPosition::At(x) => Outcome::Value(x as i64),
                SecondClassPosition::Exited => Outcome::Exited,
            },
            Observable::SecondClassExited => {
                Outcome::Value((track_f(cfg)? == SecondClassPosition::Exited) as i64)
            }
            Observable::Height { color, x } => Outcome::Value(height_count(cfg, color, x) as i64),
            Observable::StepIdentity { family, coordinate } => {
                let currents: Vec<u64> =
                    family.sites().into_iter().map(|x| height_count(cfg, Color::FIRST, x) as u64).collect();
                let value = family.evaluate(&currents);
                let v = match value {
                    IdentityValue::Indicator(b) => b as u64,
                    IdentityValue::Pair(a, b) => [a, b][coordinate.min(1)],
                    IdentityValue::Triple(a, b, c) => [a, b, c][coordinate.min(2)],
                };
                Outcome::Value(v as i64)
            }
        })
    }

    pub fn name(&self) -> String {
        match *self {
            Observable::SecondClassSite => "f".into(),
            Observable::SecondClassExited => "f_exited".into(),
            Observable::Height { color, x } => format!("N{}({x})", color.rank()),
            Observable::StepIdentity { family, coordinate } => {
                format!("{}[{coordinate}]", family.name())
            }
        }
    }
}

/// One CSV row `(replica, t, observable, value)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub replica: u64,
    pub t: f64,
    pub observable: String,
    pub value: Outcome,
}

impl ObservableRecord {
    pub const CSV_HEADER: &'static str = "replica,t,observable,value";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.replica, self.t, self.observable, self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::window_of;

    const H: u8 = 0;

    fn one(m1: usize, m2: usize, variant: OneShockVariant) -> SiteConfiguration {
        build_initial(&InitialCondition::OneShock(OneShockSpec { m1, m2, variant }))
    }

    fn two(n: usize, m: usize, variant: TwoShockVariant) -> SiteConfiguration {
        build_initial(&InitialCondition::TwoShock(TwoShockSpec { n, m, variant }))
    }

    #[test]
    fn builders_match_layouts() {
        assert_eq!(one(1, 1, OneShockVariant::Eta).window(), window_of(&[H, 2, 1]).window());
        assert_eq!(one(0, 0, OneShockVariant::Eta).window(), window_of(&[2]).window());
        assert_eq!(one(2, 2, OneShockVariant::EtaTilde).window(), window_of(&[H, H, 2, 2, 2]).window());
        assert_eq!(two(1, 1, TwoShockVariant::XiTilde).window(), window_of(&[H, 2, H, 3, 3]).window());
        assert_eq!(two(1, 1, TwoShockVariant::Xi).window(), window_of(&[H, 1, H, 2, 1]).window());
        assert_eq!(two(2, 1, TwoShockVariant::Xi).window().len(), 7);
        assert!(build_initial(&InitialCondition::Step).window().is_empty());
    }

    #[test]
    fn tracking_second_class() {
        assert_eq!(track_f(&window_of(&[H, 2, 1])).unwrap(), SecondClassPosition::At(2));
        let mut cfg = window_of(&[2, 1]);
        cfg.apply_injection();
        assert_eq!(track_f(&cfg).unwrap(), SecondClassPosition::Exited);
        assert!(track_f(&window_of(&[2, 2])).is_err());
        assert!(track_f(&window_of(&[1, H])).is_err());
    }

    #[test]
    fn heights() {
        let cfg = window_of(&[1, 2, 1]);
        assert_eq!(height_count(&cfg, Color::FIRST, 1), 2);
        assert_eq!(height_count(&cfg, Color::SECOND, 3), 0);
        assert_eq!(height_count(&cfg, Color::FIRST, 9), 0);
        for c in [Color::FIRST, Color::SECOND, Color::THIRD] {
            assert_eq!(height_count(&cfg, c, 1), cfg.count(c));
        }
    }

    #[test]
    fn kpz_examples() {
        let p = kpz_parameters(&KpzScalingSpec { a: 1.0, varpi: 0.0, t: 1000.0 }).unwrap();
        assert_eq!(p.alpha, 0.5);
        assert_eq!(p.block, 100);
        let p = kpz_parameters(&KpzScalingSpec { a: 1.0, varpi: 1.0, t: 1000.0 }).unwrap();
        // (1 + 2^{4/3} / 10) / 2 with 2^{4/3} = 2.519842099789746...
        assert!((p.alpha - 0.625_992_104_989_487_3).abs() < 1e-15);
        assert!(kpz_parameters(&KpzScalingSpec { a: 1.0, varpi: 10.0, t: 8.0 }).is_err());
        assert_eq!(floor_two_thirds(2.0, 27.0), 18);
        assert_eq!(floor_two_thirds(1.0, 999.0), 99);
    }

    #[test]
    fn csv_rows() {
        let rec = ObservableRecord { replica: 3, t: 2.5, observable: "f".into(), value: Outcome::Exited };
        assert_eq!(rec.csv_row(), "3,2.5,f,exited");
    }
}
