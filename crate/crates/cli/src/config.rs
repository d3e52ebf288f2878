use std::path::{Path, PathBuf};

use halfline_tasep::laws::{IdentityFamily, LawFamily};
use halfline_tasep::shock::{
    InitialCondition, KpzScalingSpec, Observable, OneShockSpec, OneShockVariant, TwoShockSpec,
    TwoShockVariant,
};
use halfline_tasep::tasep::{Color, Scheme};
use halfline_tasep::Rate;
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    pub model: Option<ModelSection>,
    pub simulate: Option<SimulateSection>,
    pub exact: Option<ExactSection>,
    pub verify: Option<VerifySection>,
    pub sweep: Option<SweepSection>,
    pub hecke: Option<HeckeSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A rate written as a string (`"3/4"`, `"0.4"`) or a TOML number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RateField {
    Text(String),
    Number(f64),
}

impl RateField {
    pub fn rate(&self) -> Result<Rate, Failure> {
        match self {
            RateField::Text(s) => s.parse(),
            RateField::Number(x) => Rate::from_f64(*x),
        }
        .map_err(Failure::config)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `one_shock`, `two_shock` or `step`.
    pub initial: String,
    pub variant: Option<String>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<RateField>,
    pub kpz: Option<KpzSection>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpzSection {
    pub a: f64,
    pub varpi: f64,
    pub t: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub times: Vec<f64>,
    pub replicas: u64,
    pub observables: Vec<String>,
    #[serde(default = "yes")]
    pub records: bool,
    #[serde(default)]
    pub scheme: Scheme,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    /// A law family name or `dehp`.
    pub family: String,
    pub alpha: RateField,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub argument: Option<usize>,
    /// Occupation word for `dehp`, e.g. `"100"`.
    pub word: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub suite: String,
    pub replica_scale: Option<f64>,
    pub z_threshold: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// A law family name; the grid is `alpha x p x q`, plus `argument`
    /// for height families (all admissible values when omitted).
    pub family: String,
    pub alpha: Vec<RateField>,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub argument: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeckeSection {
    pub n: usize,
    pub alpha: Vec<f64>,
    pub t: Vec<f64>,
    /// Generator words, letters in `0..n`.
    pub words: Vec<Vec<usize>>,
    pub tolerance: Option<f64>,
}

/// Parsed config plus its source text, kept for output metadata.
pub struct Loaded {
    pub config: Config,
    pub text: String,
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let config = toml::from_str(&text).map_err(|e| Failure::config(e.to_string()))?;
    Ok(Loaded { config, text })
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::config(format!("missing key {what}")))
}

impl ModelSection {
    pub fn initial_condition(&self) -> Result<InitialCondition, Failure> {
        let variant = self.variant.as_deref();
        Ok(match self.initial.as_str() {
            "one_shock" => {
                let variant = match variant.unwrap_or("eta") {
                    "eta" => OneShockVariant::Eta,
                    "eta_tilde" => OneShockVariant::EtaTilde,
                    v => return Err(Failure::config(format!("unknown one_shock variant {v:?}"))),
                };
                let (m1, m2) = match self.kpz {
                    Some(k) => {
                        let b = self.kpz_block(k)?;
                        (b, b)
                    }
                    None => (need(self.m1, "model.m1")?, need(self.m2, "model.m2")?),
                };
                InitialCondition::OneShock(OneShockSpec { m1, m2, variant })
            }
            "two_shock" => {
                let variant = match variant.unwrap_or("xi") {
                    "xi" => TwoShockVariant::Xi,
                    "xi_tilde" => TwoShockVariant::XiTilde,
                    v => return Err(Failure::config(format!("unknown two_shock variant {v:?}"))),
                };
                let (n, m) = match self.kpz {
                    Some(k) => {
                        let b = self.kpz_block(k)?;
                        (b, b)
                    }
                    None => (need(self.n, "model.n")?, need(self.m, "model.m")?),
                };
                InitialCondition::TwoShock(TwoShockSpec { n, m, variant })
            }
            "step" => InitialCondition::Step,
            other => return Err(Failure::config(format!("unknown initial condition {other:?}"))),
        })
    }

    fn kpz_block(&self, k: KpzSection) -> Result<usize, Failure> {
        Ok(halfline_tasep::shock::kpz_parameters(&kpz_spec(k)).map_err(Failure::config)?.block)
    }

    pub fn alpha(&self) -> Result<f64, Failure> {
        match (&self.alpha, self.kpz) {
            (Some(_), Some(_)) => Err(Failure::config("give model.alpha or model.kpz, not both")),
            (Some(a), None) => Ok(a.rate()?.to_f64()),
            (None, Some(k)) => {
                Ok(halfline_tasep::shock::kpz_parameters(&kpz_spec(k)).map_err(Failure::config)?.alpha)
            }
            (None, None) => Err(Failure::config("missing key model.alpha")),
        }
    }
}

fn kpz_spec(k: KpzSection) -> KpzScalingSpec {
    KpzScalingSpec { a: k.a, varpi: k.varpi, t: k.t }
}

/// Observable syntax: `f`, `f_exited`, `height:<color>@<x>`, `current@<x>`
/// or `identity:<family>:<p>:<q>:<coordinate>`.
pub fn parse_observable(s: &str) -> Result<Observable, Failure> {
    let bad = || Failure::config(format!("bad observable {s:?}"));
    let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
    if s == "f" {
        return Ok(Observable::SecondClassSite);
    }
    if s == "f_exited" {
        return Ok(Observable::SecondClassExited);
    }
    if let Some(x) = s.strip_prefix("current@") {
        let x = num(x)?;
        if x == 0 {
            return Err(bad());
        }
        return Ok(Observable::Height { color: Color::FIRST, x });
    }
    if let Some(rest) = s.strip_prefix("height:") {
        let (c, x) = rest.split_once('@').ok_or_else(bad)?;
        let color = Color::particle(c.parse::<u8>().map_err(|_| bad())?).ok_or_else(bad)?;
        let x = num(x)?;
        if x == 0 {
            return Err(bad());
        }
        return Ok(Observable::Height { color, x });
    }
    if let Some(rest) = s.strip_prefix("identity:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [name, p, q, coord] = parts.as_slice() else { return Err(bad()) };
        let (p, q, coordinate) = (num(p)?, num(q)?, num(coord)?);
        let family = match *name {
            "one_shock_exit" => IdentityFamily::OneShockExit { m1: p, m2: q },
            "one_shock_heights" => IdentityFamily::OneShockHeights { m1: p, m2: q },
            "two_shock_exit" => IdentityFamily::TwoShockExit { n: p, m: q },
            "two_shock_heights" => IdentityFamily::TwoShockHeights { n: p, m: q },
            _ => return Err(bad()),
        };
        let width = match family {
            IdentityFamily::OneShockExit { .. } | IdentityFamily::TwoShockExit { .. } => 1,
            IdentityFamily::OneShockHeights { .. } => 2,
            IdentityFamily::TwoShockHeights { .. } => 3,
        };
        if coordinate >= width {
            return Err(bad());
        }
        return Ok(Observable::StepIdentity { family, coordinate });
    }
    Err(bad())
}

pub fn law_family(s: &str) -> Result<LawFamily, Failure> {
    LawFamily::parse(s).map_err(Failure::config)
}
