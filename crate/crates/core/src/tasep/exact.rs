use std::collections::{BTreeMap, HashMap};

use super::{Color, SiteConfiguration};
use crate::ctmc::{poisson_upper_tail, RateMatrix};
use crate::error::{Error, Result};

const MAX_STATES: usize = 1_000_000;

/// Exact law of the configuration at time `t`, restricted to states with
/// no particle beyond the site cap.
#[derive(Clone, Debug)]
pub struct ExactTable {
    pub states: Vec<SiteConfiguration>,
    pub probs: Vec<f64>,
    /// Analytic bound on the probability that a particle passed the cap.
    pub escape_bound: f64,
    /// Mass that actually flowed past the cap in the computation.
    pub escaped_mass: f64,
    pub series_tail: f64,
}

impl ExactTable {
    /// Total-variation distance to the true law is at most this.
    pub fn truncation_bound(&self) -> f64 {
        self.escape_bound + self.series_tail
    }

    pub fn prob(&self, cfg: &SiteConfiguration) -> f64 {
        self.states.iter().position(|s| s == cfg).map_or(0.0, |i| self.probs[i])
    }

    /// Pushes the law forward through `key`.
    pub fn marginal<K: Ord, F: Fn(&SiteConfiguration) -> K>(&self, key: F) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for (s, &p) in self.states.iter().zip(&self.probs) {
            *out.entry(key(s)).or_insert(0.0) += p;
        }
        out
    }
}

fn normalized(cfg: &SiteConfiguration) -> SiteConfiguration {
    let mut c = cfg.clone();
    let keep = c.rightmost_particle();
    c.window.truncate(keep);
    c
}

/// Computes the law at time `t` by uniformization on the chain truncated to
/// configurations whose rightmost particle sits at or before `site_cap`.
///
/// The rightmost particle always has a hole ahead of it, so its position
/// grows by at most a rate-1 Poisson count; that bounds the probability of
/// reaching `site_cap + 1` and the computation refuses to run when the bound
/// is not below `tolerance`.
pub fn exact_distribution_small(
    cfg0: &SiteConfiguration,
    alpha: f64,
    t: f64,
    site_cap: usize,
    tolerance: f64,
) -> Result<ExactTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidRate(alpha.to_string()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let start = normalized(cfg0);
    let front = start.rightmost_particle().max(1);
    if front > site_cap {
        return Err(Error::InvalidParameter(format!(
            "initial configuration reaches site {front} beyond cap {site_cap}"
        )));
    }
    let escape_bound = poisson_upper_tail(t, site_cap + 1 - front);
    if escape_bound >= tolerance {
        return Err(Error::Truncation { bound: escape_bound, tolerance });
    }

    let mut index: HashMap<SiteConfiguration, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    const SINK: usize = usize::MAX;
    let mut cursor = 0;
    while cursor < states.len() {
        let s = states[cursor].clone();
        let mut out = Vec::new();
        let mut push = |next: SiteConfiguration, rate: f64, states: &mut Vec<SiteConfiguration>| {
            if next.rightmost_particle() > site_cap {
                out.push((SINK, rate));
                return Ok(());
            }
            let next = normalized(&next);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= MAX_STATES {
                        return Err(Error::StateSpaceOverflow(MAX_STATES));
                    }
                    index.insert(next.clone(), states.len());
                    states.push(next);
                    states.len() - 1
                }
            };
            out.push((id, rate));
            Ok(())
        };
        if s.color(1) != Color::FIRST {
            let mut next = s.clone();
            next.apply_injection();
            push(next, alpha, &mut states)?;
        }
        for x in 1..=s.rightmost_particle() {
            if s.color(x) < s.color(x + 1) {
                let mut next = s.clone();
                next.apply_bulk_swap(x);
                push(next, 1.0, &mut states)?;
            }
        }
        edges.push(out);
        cursor += 1;
    }

    let n = states.len();
    let mut q = RateMatrix::new(n + 1);
    for (i, row) in edges.iter().enumerate() {
        for &(j, r) in row {
            q.add(i, if j == SINK { n } else { j }, r);
        }
    }
    let mut init = vec![0.0; n + 1];
    init[0] = 1.0;
    let lambda = alpha + site_cap as f64;
    let res = q.transient(&init, lambda, t, (tolerance * 1e-3).min(1e-13))?;
    let escaped_mass = res.probs[n];
    let mut probs = res.probs;
    probs.truncate(n);
    Ok(ExactTable { states, probs, escape_bound, escaped_mass, series_tail: res.series_tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::window_of;

    #[test]
    fn zero_time_is_point_mass() {
        let cfg = window_of(&[0, 2, 1]);
        let table = exact_distribution_small(&cfg, 0.4, 0.0, 5, 1e-9).unwrap();
        assert_eq!(table.prob(&cfg), 1.0);
        assert!(table.truncation_bound() < 1e-9);
    }

    #[test]
    fn lone_blocked_particle_is_poisson() {
        // Particles injected later never overtake the initial one, so the
        // rightmost particle is always it and moves at rate 1.
        let t = 1.0;
        let table = exact_distribution_small(&window_of(&[1]), 0.3, t, 14, 1e-9).unwrap();
        let law = table.marginal(|s| s.rightmost_particle());
        let mut fact = 1.0;
        for k in 0..8usize {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = (-t).exp() * t.powi(k as i32) / fact;
            let got = law.get(&(1 + k)).copied().unwrap_or(0.0);
            assert!((got - expected).abs() < 1e-9, "k={k}: {got} vs {expected}");
        }
    }

    #[test]
    fn refuses_when_cap_too_small() {
        let err = exact_distribution_small(&window_of(&[2]), 0.4, 5.0, 3, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn probabilities_sum_to_one_within_bound() {
        let table = exact_distribution_small(&window_of(&[2]), 0.4, 0.5, 12, 1e-8).unwrap();
        let total: f64 = table.probs.iter().sum();
        assert!((1.0 - total).abs() <= table.truncation_bound() + 1e-12);
        assert!(table.escaped_mass <= table.escape_bound + 1e-15);
    }
}
