//! One-sided multi-species half-line open TASEP.
//!
//! Sites are numbered from 1. A configuration stores a dense window of
//! colors for sites `1..=R`; every site beyond `R` is a hole. Particles
//! pushed out through site 1 by an injection are counted in the exit tally.

mod exact;
mod sim;

pub use exact::{exact_distribution_small, ExactTable};
pub use sim::{
    simulate, simulate_until, simulate_until_active, EventKind, EventLog, EventRecord, NoObserver, Observer,
    Scheme, SimulationClock,
};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Species rank. Smaller colors jump over larger ones; the hole is the
/// largest color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Color(u8);

impl Color {
    pub const FIRST: Color = Color(1);
    pub const SECOND: Color = Color(2);
    pub const THIRD: Color = Color(3);
    pub const HOLE: Color = Color(u8::MAX);

    /// Particle classes 1, 2, 3; anything else is rejected.
    pub fn particle(rank: u8) -> Option<Color> {
        (1..=3).contains(&rank).then_some(Color(rank))
    }

    pub fn rank(self) -> u8 {
        self.0
    }

    pub fn is_hole(self) -> bool {
        self == Color::HOLE
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_hole() {
            f.write_str("H")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// What an injection attempt did at site 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Injection {
    /// Site 1 already held a first-class particle.
    Blocked,
    /// A hole at site 1 was filled.
    Filled,
    /// A second- or third-class particle left the system.
    Ejected(Color),
}

impl Injection {
    pub fn applied(self) -> bool {
        !matches!(self, Injection::Blocked)
    }
}

/// Colors on sites `1..=R` plus the tally of particles that left through
/// the boundary.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SiteConfiguration {
    window: Vec<Color>,
    exited: [u32; 2],
}

impl SiteConfiguration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_window(window: Vec<Color>) -> Self {
        SiteConfiguration { window, exited: [0; 2] }
    }

    /// Active extent `R`.
    pub fn extent(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[Color] {
        &self.window
    }

    /// Color at site `x >= 1`.
    #[inline]
    pub fn color(&self, x: usize) -> Color {
        debug_assert!(x >= 1);
        self.window.get(x - 1).copied().unwrap_or(Color::HOLE)
    }

    /// Number of particles of `color` that have left the system.
    pub fn exited(&self, color: Color) -> u32 {
        match color.rank() {
            2 => self.exited[0],
            3 => self.exited[1],
            _ => 0,
        }
    }

    /// Occurrences of `color` inside the window.
    pub fn count(&self, color: Color) -> usize {
        self.window.iter().filter(|&&c| c == color).count()
    }

    /// Rightmost site holding a particle, or 0 when there is none.
    pub fn rightmost_particle(&self) -> usize {
        self.window.iter().rposition(|c| !c.is_hole()).map_or(0, |i| i + 1)
    }

    /// Exchanges the colors on `x` and `x + 1` when `color(x) < color(x+1)`.
    ///
    /// The window grows by one site when a particle steps onto `R + 1`.
    #[inline]
    pub fn apply_bulk_swap(&mut self, x: usize) -> bool {
        debug_assert!(x >= 1);
        let r = self.window.len();
        if x < r {
            let (a, b) = (self.window[x - 1], self.window[x]);
            if a < b {
                self.window[x - 1] = b;
                self.window[x] = a;
                return true;
            }
            false
        } else if x == r {
            let a = self.window[x - 1];
            if a.is_hole() {
                return false;
            }
            self.window[x - 1] = Color::HOLE;
            self.window.push(a);
            true
        } else {
            false
        }
    }

    /// Creates a first-class particle at site 1 unless one is already there.
    #[inline]
    pub fn apply_injection(&mut self) -> Injection {
        let Some(first) = self.window.first_mut() else {
            self.window.push(Color::FIRST);
            return Injection::Filled;
        };
        let old = *first;
        if old == Color::FIRST {
            return Injection::Blocked;
        }
        *first = Color::FIRST;
        match old.rank() {
            2 => {
                self.exited[0] += 1;
                Injection::Ejected(old)
            }
            3 => {
                self.exited[1] += 1;
                Injection::Ejected(old)
            }
            _ => Injection::Filled,
        }
    }

    /// Window with trailing holes removed; two configurations describe the
    /// same state iff their trimmed windows and exit tallies agree.
    pub fn trimmed(&self) -> &[Color] {
        &self.window[..self.rightmost_particle()]
    }
}

impl PartialEq for SiteConfiguration {
    fn eq(&self, other: &Self) -> bool {
        self.exited == other.exited && self.trimmed() == other.trimmed()
    }
}

impl Eq for SiteConfiguration {}

impl std::hash::Hash for SiteConfiguration {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state);
        self.exited.hash(state);
    }
}

impl fmt::Display for SiteConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.window.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")?;
        if self.exited != [0, 0] {
            write!(f, " exited(2:{}, 3:{})", self.exited[0], self.exited[1])?;
        }
        Ok(())
    }
}

/// Shorthand used by tests and builders: `0` is a hole.
pub fn window_of(ranks: &[u8]) -> SiteConfiguration {
    SiteConfiguration::from_window(ranks.iter().map(|&r| Color::particle(r).unwrap_or(Color::HOLE)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: u8 = 0;

    #[test]
    fn bulk_swap_examples() {
        let mut cfg = window_of(&[2, H]);
        assert!(cfg.apply_bulk_swap(1));
        assert_eq!(cfg, window_of(&[H, 2]));

        let mut cfg = window_of(&[1, 2]);
        assert!(cfg.apply_bulk_swap(1));
        assert_eq!(cfg.window(), window_of(&[2, 1]).window());

        let mut cfg = window_of(&[2, 1]);
        assert!(!cfg.apply_bulk_swap(1));
        assert_eq!(cfg.window(), window_of(&[2, 1]).window());
    }

    #[test]
    fn swap_at_extent_grows_window() {
        let mut cfg = window_of(&[H, 1]);
        assert!(cfg.apply_bulk_swap(2));
        assert_eq!(cfg.extent(), 3);
        assert_eq!(cfg.color(3), Color::FIRST);
        assert!(!cfg.apply_bulk_swap(7));
        let mut hole_end = window_of(&[1, H]);
        assert!(!hole_end.apply_bulk_swap(2));
        assert_eq!(hole_end.extent(), 2);
    }

    #[test]
    fn injection_examples() {
        let mut cfg = window_of(&[H, 1]);
        assert_eq!(cfg.apply_injection(), Injection::Filled);
        assert_eq!(cfg, window_of(&[1, 1]));

        let mut cfg = window_of(&[2, 1]);
        assert_eq!(cfg.apply_injection(), Injection::Ejected(Color::SECOND));
        assert_eq!(cfg.window(), window_of(&[1, 1]).window());
        assert_eq!(cfg.exited(Color::SECOND), 1);

        let mut cfg = window_of(&[1, H]);
        assert_eq!(cfg.apply_injection(), Injection::Blocked);
        assert_eq!(cfg, window_of(&[1, H]));

        let mut empty = SiteConfiguration::empty();
        assert_eq!(empty.apply_injection(), Injection::Filled);
        assert_eq!(empty.window(), &[Color::FIRST]);
    }

    #[test]
    fn equality_ignores_trailing_holes() {
        assert_eq!(window_of(&[1, H, H]), window_of(&[1]));
        assert_ne!(window_of(&[1, H, 2]), window_of(&[1, 2]));
        assert_eq!(format!("{}", window_of(&[H, 2, 1])), "[H,2,1]");
    }
}
