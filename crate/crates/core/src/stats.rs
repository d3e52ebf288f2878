//! Monte Carlo ensembles and the statistical comparisons run on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::shock::{build_initial, InitialCondition, Observable, Outcome};
use crate::tasep::{simulate, NoObserver, Scheme, SimulationClock};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub initial: InitialCondition,
    pub alpha: f64,
    /// Observation times, nonnegative and strictly increasing.
    pub times: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
    /// Stream id of the first replica; shifting it gives disjoint ensembles
    /// under the same seed.
    pub first_replica: u64,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub scheme: Scheme,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::InvalidParameter("replicas must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidRate(self.alpha.to_string()));
        }
        if self.times.is_empty() {
            return Err(Error::InvalidParameter("no observation times".into()));
        }
        let mut prev = -1.0;
        for &t in &self.times {
            if !(t.is_finite() && t > prev && t >= 0.0) {
                return Err(Error::InvalidTime(t));
            }
            prev = t;
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidParameter("no observables".into()));
        }
        Ok(())
    }
}

/// `outcomes[i][j]`: observable `j` at time `i` for one replica.
pub fn run_replica(spec: &EnsembleSpec, replica: u64) -> Result<Vec<Vec<Outcome>>> {
    let mut cfg = build_initial(&spec.initial);
    let mut clock = SimulationClock::new(spec.seed, replica);
    let mut out = Vec::with_capacity(spec.times.len());
    for &t in &spec.times {
        simulate(spec.scheme, &mut cfg, spec.alpha, t, &mut clock, &mut NoObserver)?;
        let row = spec.observables.iter().map(|o| o.observe(&cfg)).collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

/// Per-replica outcomes in replica order; `rows[r][i][j]` is replica `r`,
/// time `i`, observable `j`.
pub fn run_records(spec: &EnsembleSpec) -> Result<Vec<Vec<Vec<Outcome>>>> {
    spec.validate()?;
    let first = spec.first_replica;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..spec.replicas).into_par_iter().map(|r| run_replica(spec, first + r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..spec.replicas).map(|r| run_replica(spec, first + r)).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<Outcome, u64>,
    pub n: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, outcome: Outcome) {
        *self.counts.entry(outcome).or_insert(0) += 1;
        self.n += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.n += other.n;
    }

    pub fn count(&self, outcome: &Outcome) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn freq(&self, outcome: &Outcome) -> f64 {
        self.count(outcome) as f64 / self.n as f64
    }

    /// Relabels outcomes, merging bins that map to the same value.
    pub fn map<F: Fn(Outcome) -> Outcome>(&self, f: F) -> EmpiricalDistribution {
        let mut out = EmpiricalDistribution { counts: BTreeMap::new(), n: self.n };
        for (&k, &c) in &self.counts {
            *out.counts.entry(f(k)).or_insert(0) += c;
        }
        out
    }

    /// Mean and standard error of the numeric outcomes.
    pub fn mean(&self) -> Option<(f64, f64)> {
        let mut n = 0.0;
        let (mut s, mut s2) = (0.0, 0.0);
        for (k, &c) in &self.counts {
            if let Outcome::Value(v) = k {
                let (v, c) = (*v as f64, c as f64);
                n += c;
                s += v * c;
                s2 += v * v * c;
            }
        }
        if n == 0.0 {
            return None;
        }
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        Some((mean, (var / n).sqrt()))
    }
}

impl FromIterator<Outcome> for EmpiricalDistribution {
    fn from_iter<I: IntoIterator<Item = Outcome>>(iter: I) -> Self {
        let mut d = EmpiricalDistribution::new();
        for o in iter {
            d.push(o);
        }
        d
    }
}

/// Aggregated ensemble output, `dists[i][j]` for time `i`, observable `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub observables: Vec<String>,
    pub dists: Vec<Vec<EmpiricalDistribution>>,
}

impl EnsembleResult {
    fn empty(spec: &EnsembleSpec) -> Self {
        EnsembleResult {
            times: spec.times.clone(),
            observables: spec.observables.iter().map(Observable::name).collect(),
            dists: vec![vec![EmpiricalDistribution::new(); spec.observables.len()]; spec.times.len()],
        }
    }

    fn absorb(&mut self, rows: &[Vec<Outcome>]) {
        for (d, row) in self.dists.iter_mut().zip(rows) {
            for (e, &o) in d.iter_mut().zip(row) {
                e.push(o);
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: &EnsembleResult) -> Self {
        for (a, b) in self.dists.iter_mut().zip(&other.dists) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        self
    }

    pub fn get(&self, time: usize, observable: usize) -> &EmpiricalDistribution {
        &self.dists[time][observable]
    }
}

fn run_range(spec: &EnsembleSpec, range: std::ops::Range<u64>) -> Result<EnsembleResult> {
    let mut acc = EnsembleResult::empty(spec);
    for r in range {
        acc.absorb(&run_replica(spec, spec.first_replica + r)?);
    }
    Ok(acc)
}

/// Runs all replicas. Counts add, so the result does not depend on how
/// replicas were scheduled.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    spec.validate()?;
    run_chunks(spec)
}

#[cfg(feature = "parallel")]
fn run_chunks(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    use rayon::prelude::*;
    let chunk = 256u64;
    let chunks = spec.replicas.div_ceil(chunk);
    let parts: Vec<EnsembleResult> = (0..chunks)
        .into_par_iter()
        .map(|c| run_range(spec, c * chunk..((c + 1) * chunk).min(spec.replicas)))
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold(EnsembleResult::empty(spec), |acc, p| acc.merge(p)))
}

#[cfg(not(feature = "parallel"))]
fn run_chunks(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    run_range(spec, 0..spec.replicas)
}

/// Runs on a dedicated pool of `workers` threads.
#[cfg(feature = "parallel")]
pub fn run_ensemble_with_workers(spec: &EnsembleSpec, workers: usize) -> Result<EnsembleResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| run_ensemble(spec))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificancePolicy {
    /// Largest allowed Bonferroni-corrected two-sided z-score.
    pub z_threshold: f64,
}

impl Default for SignificancePolicy {
    fn default() -> Self {
        SignificancePolicy { z_threshold: 4.0 }
    }
}

impl SignificancePolicy {
    /// Two-sided tail probability at the threshold.
    pub fn p_value(&self) -> f64 {
        erfc(self.z_threshold / std::f64::consts::SQRT_2)
    }

    /// The z-score whose two-sided tail equals that of `|z|` times `bins`.
    pub fn corrected(z: f64, bins: usize) -> f64 {
        let z = z.abs();
        if !z.is_finite() {
            return f64::INFINITY;
        }
        let p = erfc(z / std::f64::consts::SQRT_2);
        if p == 0.0 {
            return z;
        }
        let p = (p * bins as f64).min(1.0);
        (-Normal::standard().inverse_cdf(p / 2.0)).max(0.0)
    }

    /// Critical two-sample Kolmogorov-Smirnov distance at the policy level.
    pub fn ks_critical(&self, n: u64, m: u64) -> f64 {
        let c = (-0.5 * (self.p_value() / 2.0).ln()).sqrt();
        c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinStat {
    pub outcome: Outcome,
    pub observed: f64,
    /// Second sample frequency, or the exact probability.
    pub reference: f64,
    pub z: f64,
    pub corrected_z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsStat {
    pub d: f64,
    pub critical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub n: u64,
    pub reference_n: Option<u64>,
    pub bins: Vec<BinStat>,
    pub max_abs_z: f64,
    pub max_corrected_z: f64,
    pub ks: Option<KsStat>,
    pub policy: SignificancePolicy,
    pub pass: bool,
    pub assumes_conjecture: bool,
}

impl ComparisonReport {
    fn from_bins(
        label: &str,
        n: u64,
        reference_n: Option<u64>,
        raw: Vec<(Outcome, f64, f64, f64)>,
        policy: SignificancePolicy,
    ) -> Self {
        let b = raw.len().max(1);
        let bins: Vec<BinStat> = raw
            .into_iter()
            .map(|(outcome, observed, reference, z)| BinStat {
                outcome,
                observed,
                reference,
                z,
                corrected_z: SignificancePolicy::corrected(z, b),
            })
            .collect();
        let max_abs_z = bins.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
        let max_corrected_z = bins.iter().map(|s| s.corrected_z).fold(0.0, f64::max);
        ComparisonReport {
            label: label.to_string(),
            n,
            reference_n,
            bins,
            max_abs_z,
            max_corrected_z,
            ks: None,
            policy,
            pass: max_corrected_z <= policy.z_threshold,
            assumes_conjecture: false,
        }
    }

    pub fn with_conjecture(mut self, flag: bool) -> Self {
        self.assumes_conjecture |= flag;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} n={} max|z|={:.3} corrected={:.3}",
            self.label, self.n, self.max_abs_z, self.max_corrected_z
        );
        if let Some(ks) = self.ks {
            s += &format!(" D={:.4}/{:.4}", ks.d, ks.critical);
        }
        if self.assumes_conjecture {
            s += " [assumes stationarity conjecture]";
        }
        s
    }
}

/// Two-sample per-bin z-tests with pooled variance.
pub fn compare_empirical(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    policy: SignificancePolicy,
) -> Result<ComparisonReport> {
    if a.n == 0 || b.n == 0 {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let mut keys: Vec<Outcome> = a.counts.keys().chain(b.counts.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let (na, nb) = (a.n as f64, b.n as f64);
    let raw = keys
        .into_iter()
        .map(|k| {
            let (xa, xb) = (a.count(&k) as f64, b.count(&k) as f64);
            let pooled = (xa + xb) / (na + nb);
            let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
            let diff = xa / na - xb / nb;
            let z = if se > 0.0 { diff / se } else { 0.0 };
            (k, xa / na, xb / nb, z)
        })
        .collect();
    Ok(ComparisonReport::from_bins("two-sample", a.n, Some(b.n), raw, policy))
}

/// One-sample per-bin binomial z-tests against exact probabilities.
pub fn compare_to_exact(
    samples: &EmpiricalDistribution,
    law: &BTreeMap<Outcome, f64>,
    policy: SignificancePolicy,
) -> Result<ComparisonReport> {
    if samples.n == 0 {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let total: f64 = law.values().sum();
    if (total - 1.0).abs() > 1e-9 || law.values().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidParameter(format!("law sums to {total}")));
    }
    let mut keys: Vec<Outcome> = law.keys().chain(samples.counts.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let n = samples.n as f64;
    let raw = keys
        .into_iter()
        .map(|k| {
            let p = law.get(&k).copied().unwrap_or(0.0);
            let f = samples.freq(&k);
            let se = (p * (1.0 - p) / n).sqrt();
            let z = if se > 0.0 {
                (f - p) / se
            } else if f == p {
                0.0
            } else {
                f64::INFINITY
            };
            (k, f, p, z)
        })
        .collect();
    Ok(ComparisonReport::from_bins("exact", samples.n, None, raw, policy))
}

/// Two-sample Kolmogorov-Smirnov test over the ordered outcomes.
pub fn ks_two_sample(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    policy: SignificancePolicy,
) -> Result<ComparisonReport> {
    let mut report = compare_empirical(a, b, policy)?;
    let (mut fa, mut fb, mut d) = (0.0, 0.0, 0.0f64);
    for bin in &report.bins {
        fa += bin.observed;
        fb += bin.reference;
        d = d.max((fa - fb).abs());
    }
    let critical = policy.ks_critical(a.n, b.n);
    report.ks = Some(KsStat { d, critical });
    report.pass = d <= critical;
    report.label = "ks".into();
    Ok(report)
}

/// A long-time comparison repeated at `t` and `2t`, plus the two times
/// compared against each other.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlateauReport {
    pub early: ComparisonReport,
    pub late: ComparisonReport,
    pub mutual: ComparisonReport,
    pub pass: bool,
}

pub fn plateau(
    early: ComparisonReport,
    late: ComparisonReport,
    early_samples: &EmpiricalDistribution,
    late_samples: &EmpiricalDistribution,
) -> Result<PlateauReport> {
    let mutual = compare_empirical(early_samples, late_samples, early.policy)?
        .with_label(format!("{} plateau", early.label))
        .with_conjecture(early.assumes_conjecture || late.assumes_conjecture);
    let pass = early.pass && late.pass && mutual.pass;
    Ok(PlateauReport { early, late, mutual, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(i64, u64)]) -> EmpiricalDistribution {
        let mut d = EmpiricalDistribution::new();
        for &(v, c) in pairs {
            d.counts.insert(Outcome::Value(v), c);
            d.n += c;
        }
        d
    }

    #[test]
    fn identical_samples_pass() {
        let a = dist(&[(0, 10), (1, 30)]);
        let r = compare_empirical(&a, &a, SignificancePolicy::default()).unwrap();
        assert!(r.pass);
        assert!(r.bins.iter().all(|b| b.z == 0.0));
    }

    #[test]
    fn disjoint_supports_fail() {
        let a = dist(&[(0, 100_000)]);
        let b = dist(&[(1, 100_000)]);
        assert!(!compare_empirical(&a, &b, SignificancePolicy::default()).unwrap().pass);
        assert!(!ks_two_sample(&a, &b, SignificancePolicy::default()).unwrap().pass);
    }

    #[test]
    fn point_mass_law_elsewhere_fails() {
        let law = BTreeMap::from([(Outcome::Value(0), 1.0)]);
        let r = compare_to_exact(&dist(&[(1, 5)]), &law, SignificancePolicy::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn correction_thresholds() {
        let p = SignificancePolicy::default();
        assert!((p.p_value() - 6.334e-5).abs() < 1e-7);
        assert!((SignificancePolicy::corrected(4.0, 1) - 4.0).abs() < 1e-9);
        assert!(SignificancePolicy::corrected(4.0, 10) < 4.0);
        let big = SignificancePolicy::corrected(13.0, 3);
        assert!(big.is_finite() && big > 12.0 && big < 13.0);
        assert!((p.ks_critical(10_000, 10_000) - 0.0322).abs() < 2e-4);
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = dist(&[(0, 2)]);
        a.merge(&dist(&[(0, 1), (3, 4)]));
        assert_eq!(a, dist(&[(0, 3), (3, 4)]));
    }
}
