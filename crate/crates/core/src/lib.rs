//! Half-line open TASEP workbench.
//!
//! * [`tasep`]: event-driven simulator of the multi-species half-line open
//!   TASEP and an exact small-instance oracle.
//! * [`shock`]: one- and two-shock initial conditions and their observables.
//! * [`dehp`]: cluster statistics, DEHP-tree partition functions and the
//!   stationary cylinder probabilities of the step process.
//! * [`laws`]: closed-form long-time laws of the second-class particles and
//!   the finite-time identity functionals of the step current.
//! * [`hecke`]: signed permutations, the type-BC Hecke random walk and the
//!   color-position symmetry check.
//! * [`stats`]: Monte Carlo ensembles and comparison reports.
//! * [`suites`]: the verification suites behind `halfline verify`.

pub mod ctmc;
pub mod dehp;
pub mod error;
pub mod hecke;
pub mod laws;
pub mod rational;
pub mod shock;
pub mod stats;
pub mod suites;
pub mod tasep;

pub use error::{Error, Result};
pub use rational::Rate;
