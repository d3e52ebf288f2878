use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::SiteConfiguration;
use crate::error::{Error, Result};

/// Current time plus the random stream of one replica.
///
/// The stream is ChaCha8 keyed by `seed` with `replica` as the stream id,
/// so every `(seed, replica)` pair owns an independent, reproducible
/// sequence regardless of how replicas are scheduled over workers.
#[derive(Clone, Debug)]
pub struct SimulationClock {
    t: f64,
    seed: u64,
    replica: u64,
    rng: ChaCha8Rng,
}

impl SimulationClock {
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        SimulationClock { t: 0.0, seed, replica, rng }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Injection,
    BulkSwap(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub applied: bool,
}

/// Callback interface for [`simulate_until`].
pub trait Observer {
    /// Called after every applied event, and after rejected proposals too
    /// when [`Observer::wants_rejected`] is true.
    fn on_event(&mut self, _record: &EventRecord, _cfg: &SiteConfiguration) {}

    /// Called once when the clock reaches the requested end time.
    fn on_end(&mut self, _t: f64, _cfg: &SiteConfiguration) {}

    fn wants_rejected(&self) -> bool {
        false
    }
}

pub struct NoObserver;

impl Observer for NoObserver {}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn on_event(&mut self, record: &EventRecord, cfg: &SiteConfiguration) {
        self.0.on_event(record, cfg);
        self.1.on_event(record, cfg);
    }

    fn on_end(&mut self, t: f64, cfg: &SiteConfiguration) {
        self.0.on_end(t, cfg);
        self.1.on_end(t, cfg);
    }

    fn wants_rejected(&self) -> bool {
        self.0.wants_rejected() || self.1.wants_rejected()
    }
}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_event(&mut self, record: &EventRecord, cfg: &SiteConfiguration) {
        (**self).on_event(record, cfg)
    }

    fn on_end(&mut self, t: f64, cfg: &SiteConfiguration) {
        (**self).on_end(t, cfg)
    }

    fn wants_rejected(&self) -> bool {
        (**self).wants_rejected()
    }
}

impl Observer for Vec<Box<dyn Observer + '_>> {
    fn on_event(&mut self, record: &EventRecord, cfg: &SiteConfiguration) {
        self.iter_mut().for_each(|o| o.on_event(record, cfg));
    }

    fn on_end(&mut self, t: f64, cfg: &SiteConfiguration) {
        self.iter_mut().for_each(|o| o.on_end(t, cfg));
    }

    fn wants_rejected(&self) -> bool {
        self.iter().any(|o| o.wants_rejected())
    }
}

/// Records the event stream of a trajectory.
#[derive(Clone, Debug, Default)]
pub struct EventLog {
    pub events: Vec<EventRecord>,
    pub include_rejected: bool,
}

impl EventLog {
    pub fn with_rejected() -> Self {
        EventLog { events: Vec::new(), include_rejected: true }
    }
}

impl Observer for EventLog {
    fn on_event(&mut self, record: &EventRecord, _cfg: &SiteConfiguration) {
        self.events.push(*record);
    }

    fn wants_rejected(&self) -> bool {
        self.include_rejected
    }
}

/// Runs the chain from `clock.time()` to `t_end`.
///
/// Proposals arrive at total rate `alpha + R`: injection with weight
/// `alpha`, each edge `(x, x+1)` with `1 <= x <= R` with weight 1. A
/// proposal that would not change the configuration is discarded. Edges
/// beyond `R` join hole to hole and are never proposed. The pending
/// proposal that would land after `t_end` is dropped, which is exact
/// because waiting times are memoryless.
pub fn simulate_until<O: Observer + ?Sized>(
    cfg: &mut SiteConfiguration,
    alpha: f64,
    t_end: f64,
    clock: &mut SimulationClock,
    observer: &mut O,
) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidRate(alpha.to_string()));
    }
    if !t_end.is_finite() || t_end < clock.t {
        return Err(Error::InvalidTime(t_end));
    }
    let report_rejected = observer.wants_rejected();
    loop {
        let total = alpha + cfg.extent() as f64;
        let wait: f64 = clock.rng.sample::<f64, _>(Exp1) / total;
        if clock.t + wait > t_end {
            clock.t = t_end;
            break;
        }
        clock.t += wait;
        let u = clock.rng.random::<f64>() * total;
        let (kind, applied) = if u < alpha {
            (EventKind::Injection, cfg.apply_injection().applied())
        } else {
            let x = ((u - alpha) as usize + 1).min(cfg.extent());
            (EventKind::BulkSwap(x), cfg.apply_bulk_swap(x))
        };
        if applied || report_rejected {
            let record = EventRecord { time: clock.t, kind, applied };
            observer.on_event(&record, cfg);
        }
    }
    observer.on_end(t_end, cfg);
    Ok(())
}

/// Sampling scheme for [`simulate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// [`simulate_until`].
    #[default]
    Thinning,
    /// [`simulate_until_active`].
    ActiveSet,
}

pub fn simulate<O: Observer + ?Sized>(
    scheme: Scheme,
    cfg: &mut SiteConfiguration,
    alpha: f64,
    t_end: f64,
    clock: &mut SimulationClock,
    observer: &mut O,
) -> Result<()> {
    match scheme {
        Scheme::Thinning => simulate_until(cfg, alpha, t_end, clock, observer),
        Scheme::ActiveSet => simulate_until_active(cfg, alpha, t_end, clock, observer),
    }
}

/// Edges `(x, x+1)` with `color(x) < color(x+1)`, kept as an indexed set.
struct ActiveEdges {
    list: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ActiveEdges {
    fn build(cfg: &SiteConfiguration) -> Self {
        let mut edges = ActiveEdges { list: Vec::new(), pos: vec![ABSENT; cfg.extent() + 2] };
        for x in 1..=cfg.extent() {
            edges.refresh(cfg, x);
        }
        edges
    }

    fn refresh(&mut self, cfg: &SiteConfiguration, x: usize) {
        if x == 0 {
            return;
        }
        if x >= self.pos.len() {
            self.pos.resize(x + 2, ABSENT);
        }
        let want = x <= cfg.extent() && cfg.color(x) < cfg.color(x + 1);
        let at = self.pos[x];
        if want && at == ABSENT {
            self.pos[x] = self.list.len() as u32;
            self.list.push(x as u32);
        } else if !want && at != ABSENT {
            let last = *self.list.last().unwrap();
            self.list.swap_remove(at as usize);
            if last as usize != x {
                self.pos[last as usize] = at;
            }
            self.pos[x] = ABSENT;
        }
    }
}

/// Same chain as [`simulate_until`] without rejected proposals: the clock
/// rings at rate `alpha [color(1) > 1] + #{x : color(x) < color(x+1)}` and
/// every ring is applied. Observers never see rejected events.
pub fn simulate_until_active<O: Observer + ?Sized>(
    cfg: &mut SiteConfiguration,
    alpha: f64,
    t_end: f64,
    clock: &mut SimulationClock,
    observer: &mut O,
) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidRate(alpha.to_string()));
    }
    if !t_end.is_finite() || t_end < clock.t {
        return Err(Error::InvalidTime(t_end));
    }
    let mut edges = ActiveEdges::build(cfg);
    loop {
        let inject = if cfg.color(1) == super::Color::FIRST { 0.0 } else { alpha };
        let total = inject + edges.list.len() as f64;
        let wait: f64 = clock.rng.sample::<f64, _>(Exp1) / total;
        if clock.t + wait > t_end {
            clock.t = t_end;
            break;
        }
        clock.t += wait;
        let u = clock.rng.random::<f64>() * total;
        let kind = if u < inject {
            cfg.apply_injection();
            edges.refresh(cfg, 1);
            EventKind::Injection
        } else {
            let i = ((u - inject) as usize).min(edges.list.len() - 1);
            let x = edges.list[i] as usize;
            cfg.apply_bulk_swap(x);
            edges.refresh(cfg, x - 1);
            edges.refresh(cfg, x);
            edges.refresh(cfg, x + 1);
            EventKind::BulkSwap(x)
        };
        observer.on_event(&EventRecord { time: clock.t, kind, applied: true }, cfg);
    }
    observer.on_end(t_end, cfg);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::{window_of, Color};

    #[test]
    fn rejects_bad_parameters() {
        let mut cfg = SiteConfiguration::empty();
        let mut clock = SimulationClock::new(1, 0);
        assert!(simulate_until(&mut cfg, 0.0, 1.0, &mut clock, &mut NoObserver).is_err());
        assert!(simulate_until(&mut cfg, 1.0, 1.0, &mut clock, &mut NoObserver).is_err());
        assert!(simulate_until(&mut cfg, 0.5, f64::NAN, &mut clock, &mut NoObserver).is_err());
        assert!(simulate_until(&mut cfg, 0.5, f64::INFINITY, &mut clock, &mut NoObserver).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let mut cfg = window_of(&[0, 2, 1]);
        let before = cfg.clone();
        let mut clock = SimulationClock::new(3, 9);
        simulate_until(&mut cfg, 0.4, 0.0, &mut clock, &mut NoObserver).unwrap();
        assert_eq!(cfg, before);
    }

    #[test]
    fn identical_keys_give_identical_streams() {
        let run = |seed, replica| {
            let mut cfg = window_of(&[0, 0, 2, 1, 1]);
            let mut clock = SimulationClock::new(seed, replica);
            let mut log = EventLog::with_rejected();
            simulate_until(&mut cfg, 0.4, 15.0, &mut clock, &mut log).unwrap();
            (log.events, cfg)
        };
        let (a, cfg_a) = run(11, 4);
        let (b, cfg_b) = run(11, 4);
        assert_eq!(a, b);
        assert_eq!(cfg_a, cfg_b);
        let (c, _) = run(11, 5);
        assert_ne!(a, c);
        assert!(a.windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.iter().any(|e| !e.applied));
    }

    #[test]
    fn restarting_at_intermediate_time_is_allowed() {
        let mut cfg = SiteConfiguration::empty();
        let mut clock = SimulationClock::new(5, 0);
        simulate_until(&mut cfg, 0.5, 2.0, &mut clock, &mut NoObserver).unwrap();
        simulate_until(&mut cfg, 0.5, 4.0, &mut clock, &mut NoObserver).unwrap();
        assert_eq!(clock.time(), 4.0);
        assert!(simulate_until(&mut cfg, 0.5, 3.0, &mut clock, &mut NoObserver).is_err());
        assert!(cfg.count(Color::FIRST) > 0);
    }

    #[test]
    fn active_set_applies_every_event() {
        let mut cfg = window_of(&[0, 2, 0, 1, 3]);
        let mut clock = SimulationClock::new(2, 0);
        let mut log = EventLog::with_rejected();
        simulate_until_active(&mut cfg, 0.6, 30.0, &mut clock, &mut log).unwrap();
        assert!(log.events.iter().all(|e| e.applied));
        assert!(log.events.windows(2).all(|w| w[0].time < w[1].time));
        assert_eq!(cfg.count(Color::SECOND) as u32 + cfg.exited(Color::SECOND), 1);
        assert_eq!(cfg.count(Color::THIRD) as u32 + cfg.exited(Color::THIRD), 1);
    }
}
