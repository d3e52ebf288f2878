//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export takes plain numbers or strings and returns a JSON string. The
//! `*_json` functions hold the logic and run natively for testing.

use halfline_tasep::dehp::{stationary_prob, BinaryWord, Regime};
use halfline_tasep::laws::{p_exist_one_shock, p_height_one_shock, p_height_one_shock_top};
use halfline_tasep::rational::to_f64;
use halfline_tasep::shock::{
    build_initial, track_f, InitialCondition, OneShockSpec, OneShockVariant, SecondClassPosition,
};
use halfline_tasep::tasep::{simulate, Color, NoObserver, Scheme, SimulationClock};
use halfline_tasep::Rate;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest window for the exact density profile.
pub const MAX_PROFILE_LEN: usize = 10;

#[derive(Serialize)]
pub struct Profile {
    pub alpha: String,
    pub regime: &'static str,
    pub assumes_conjecture: bool,
    /// `density[x - 1]` is the stationary probability that site `x` is occupied.
    pub density: Vec<f64>,
}

#[derive(Serialize)]
pub struct OneShockLaw {
    pub alpha: String,
    pub m1: usize,
    pub m2: usize,
    pub assumes_conjecture: bool,
    pub exist: f64,
    /// `height[m]`: long-time probability that `m` of the `M2 + 1` second-class
    /// particles of the all-second-class start remain, `0 <= m <= M2 + 1`.
    pub height: Vec<f64>,
}

#[derive(Serialize)]
pub struct Snapshot {
    pub t: f64,
    /// Colors of sites `1..`: 1 first class, 2 second class, 0 hole.
    pub sites: Vec<u8>,
    pub second_class_site: Option<usize>,
    pub second_class_left: u32,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Bernoulli => "bernoulli",
        Regime::Mpa => "mpa",
    }
}

fn rate(alpha: &str) -> Result<Rate, String> {
    alpha.trim().parse().map_err(|e: halfline_tasep::Error| e.to_string())
}

/// Occupation probabilities of sites `1..=len` under the stationary measure.
pub fn density_profile_json(alpha: &str, len: usize) -> Result<String, String> {
    if len == 0 || len > MAX_PROFILE_LEN {
        return Err(format!("length must lie in 1..={MAX_PROFILE_LEN}"));
    }
    let a = rate(alpha)?;
    let mut density = Vec::with_capacity(len);
    let mut regime = Regime::Bernoulli;
    let mut conjecture = false;
    for x in 1..=len {
        let mut p = 0.0;
        for w in BinaryWord::all(x).filter(|w| w.bits()[x - 1]) {
            let c = stationary_prob(&w, &a);
            regime = c.regime;
            conjecture |= c.assumes_conjecture;
            p += to_f64(&c.value);
        }
        density.push(p);
    }
    let profile = Profile {
        alpha: a.to_string(),
        regime: regime_name(regime),
        assumes_conjecture: conjecture,
        density,
    };
    serde_json::to_string(&profile).map_err(|e| e.to_string())
}

pub fn one_shock_law_json(alpha: &str, m1: usize, m2: usize) -> Result<String, String> {
    let a = rate(alpha)?;
    let err = |e: halfline_tasep::Error| e.to_string();
    let exist = p_exist_one_shock(m1, m2, &a).map_err(err)?;
    let mut height = Vec::with_capacity(m2 + 2);
    for m in 0..=m2 {
        height.push(to_f64(&p_height_one_shock(m, m1, m2, &a).map_err(err)?.value));
    }
    height.push(to_f64(&p_height_one_shock_top(m1, m2, &a).map_err(err)?.value));
    let law = OneShockLaw {
        alpha: a.to_string(),
        m1,
        m2,
        assumes_conjecture: exist.assumes_conjecture,
        exist: to_f64(&exist.value),
        height,
    };
    serde_json::to_string(&law).map_err(|e| e.to_string())
}

/// One run of the one-shock process from time 0 to `t`.
pub fn snapshot_json(alpha: f64, m1: usize, m2: usize, t: f64, seed: u64) -> Result<String, String> {
    if m1 + m2 > 200 {
        return Err("m1 + m2 must not exceed 200".into());
    }
    let ic = InitialCondition::OneShock(OneShockSpec { m1, m2, variant: OneShockVariant::Eta });
    let mut cfg = build_initial(&ic);
    let mut clock = SimulationClock::new(seed, 0);
    simulate(Scheme::ActiveSet, &mut cfg, alpha, t, &mut clock, &mut NoObserver)
        .map_err(|e| e.to_string())?;
    let sites = cfg.trimmed().iter().map(|c| if c.is_hole() { 0 } else { c.rank() }).collect();
    let second_class_site = match track_f(&cfg).map_err(|e| e.to_string())? {
        SecondClassPosition::At(x) => Some(x),
        SecondClassPosition::Exited => None,
    };
    let snap = Snapshot { t, sites, second_class_site, second_class_left: cfg.exited(Color::SECOND) };
    serde_json::to_string(&snap).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn density_profile(alpha: &str, len: usize) -> Result<String, JsError> {
    density_profile_json(alpha, len).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn one_shock_law(alpha: &str, m1: usize, m2: usize) -> Result<String, JsError> {
    one_shock_law_json(alpha, m1, m2).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn snapshot(alpha: f64, m1: usize, m2: usize, t: f64, seed: u64) -> Result<String, JsError> {
    snapshot_json(alpha, m1, m2, t, seed).map_err(|e| JsError::new(&e))
}
