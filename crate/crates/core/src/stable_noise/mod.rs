//! Random inputs: strictly stable increments, Pareto collateral laws, and
//! seeded stream management.

mod doa;
mod seeds;
mod stable;

pub use doa::{sample_doa, stable_target_of, DoaKind, DoaLaw};
pub use seeds::{SeedTree, Stream};
pub use stable::{sample_stable_increment, StableParams, StableSampler};
