//! Transient laws of finite continuous-time Markov chains by uniformization.

use crate::error::{Error, Result};

/// Off-diagonal jump rates of a finite chain, one row per state.
#[derive(Clone, Debug, Default)]
pub struct RateMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

/// Law at time `t` plus a bound on the mass dropped by truncating the
/// Poisson series.
#[derive(Clone, Debug)]
pub struct Transient {
    pub probs: Vec<f64>,
    pub series_tail: f64,
}

impl RateMatrix {
    pub fn new(states: usize) -> Self {
        RateMatrix { rows: vec![Vec::new(); states] }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds rate `rate` for the jump `from -> to`; self-loops are ignored.
    pub fn add(&mut self, from: usize, to: usize, rate: f64) {
        if from != to && rate > 0.0 {
            self.rows[from].push((to, rate));
        }
    }

    pub fn exit_rate(&self, state: usize) -> f64 {
        self.rows[state].iter().map(|&(_, r)| r).sum()
    }

    /// Propagates `init` for time `t` using uniformization at rate `lambda`,
    /// which must dominate every exit rate. The series is cut once the
    /// remaining Poisson tail is below `tol`.
    pub fn transient(&self, init: &[f64], lambda: f64, t: f64, tol: f64) -> Result<Transient> {
        assert_eq!(init.len(), self.rows.len());
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime(t));
        }
        let max_exit = (0..self.len()).map(|s| self.exit_rate(s)).fold(0.0, f64::max);
        if lambda < max_exit * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "uniformization rate {lambda} below exit rate {max_exit}"
            )));
        }
        let x = lambda * t;
        if x > 600.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda * t = {x} too large for direct uniformization"
            )));
        }
        let diag: Vec<f64> = (0..self.len()).map(|s| 1.0 - self.exit_rate(s) / lambda).collect();

        let mut weight = (-x).exp();
        let mut v = init.to_vec();
        let mut out: Vec<f64> = v.iter().map(|p| p * weight).collect();
        let mut next = vec![0.0; v.len()];
        let mut k = 0usize;
        loop {
            let kf = k as f64;
            if kf + 2.0 > x {
                let w_next = weight * x / (kf + 1.0);
                let tail = w_next / (1.0 - x / (kf + 2.0));
                if tail < tol {
                    return Ok(Transient { probs: out, series_tail: tail });
                }
            }
            k += 1;
            weight *= x / k as f64;
            next.iter_mut().for_each(|p| *p = 0.0);
            for (i, &p) in v.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                next[i] += p * diag[i];
                for &(j, r) in &self.rows[i] {
                    next[j] += p * r / lambda;
                }
            }
            std::mem::swap(&mut v, &mut next);
            for (o, p) in out.iter_mut().zip(&v) {
                *o += weight * p;
            }
        }
    }
}

/// `P(Poisson(mean) >= k)`, summed directly.
pub fn poisson_upper_tail(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    // P(X <= k-1), accumulated from the smallest term up.
    let mut term = (-mean).exp();
    let mut below = term;
    for j in 1..k {
        term *= mean / j as f64;
        below += term;
    }
    if below < 0.5 {
        return 1.0 - below;
    }
    // Sum the upper tail directly to avoid cancellation.
    let mut tail = 0.0;
    let mut j = k;
    let mut t = term * mean / k as f64;
    loop {
        tail += t;
        j += 1;
        t *= mean / j as f64;
        if t < tail * 1e-18 || t == 0.0 {
            break;
        }
    }
    tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_chain_matches_closed_form() {
        // 0 -> 1 at rate a, 1 -> 0 at rate b.
        let (a, b, t) = (0.7, 0.3, 1.3);
        let mut q = RateMatrix::new(2);
        q.add(0, 1, a);
        q.add(1, 0, b);
        let res = q.transient(&[1.0, 0.0], 1.0, t, 1e-14).unwrap();
        let p1 = a / (a + b) * (1.0 - (-(a + b) * t).exp());
        assert!((res.probs[1] - p1).abs() < 1e-12);
        assert!(res.series_tail < 1e-14);
    }

    #[test]
    fn poisson_tail_small_cases() {
        let m: f64 = 0.5;
        let exact = 1.0 - (-m).exp() * (1.0 + m);
        assert!((poisson_upper_tail(m, 2) - exact).abs() < 1e-15);
        assert_eq!(poisson_upper_tail(3.0, 0), 1.0);
        assert!(poisson_upper_tail(0.5, 20) < 1e-20);
    }

    #[test]
    fn rejects_dominating_rate_violation() {
        let mut q = RateMatrix::new(2);
        q.add(0, 1, 2.0);
        assert!(q.transient(&[1.0, 0.0], 1.0, 1.0, 1e-12).is_err());
    }
}
