//! Simulation of mean-field particle systems whose particles jump together.
//!
//! When particle `i` fires (at rate `f(X^i)`), it moves by a main jump
//! `psi(X^i)` and every other particle moves by the same heavy-tailed amount
//! `u / N^(1/alpha)`, with `u` drawn from a law in the domain of attraction of
//! a strictly `alpha`-stable law. As `N` grows the summed collateral jumps
//! become a time-changed stable process, and the particles become i.i.d.
//! only conditionally on that common stable noise.
//!
//! * [`stable_noise`]: stable increments, Pareto collateral laws, seeded streams.
//! * [`model`]: coefficient families `(b, psi, f)` and initial laws.
//! * [`finite_system`]: exact thinning simulation of the N-particle system,
//!   its cumulated intensity and path decomposition.
//! * [`limit_system`]: M-particle simulation of the conditional McKean-Vlasov
//!   limit driven by one stable path.
//! * [`measures`]: 1-D Wasserstein distances and Kolmogorov-Smirnov statistics.
//! * [`harness`]: experiment configuration, catalog and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finite_system;
pub mod harness;
pub mod limit_system;
pub mod measures;
pub mod model;
pub mod stable_noise;

pub use error::{Error, Result};
