//! Workbench for the 3x+1 and 5x+1 problems: deterministic dynamics, orbit
//! statistics, inverse-tree censuses, stochastic models, and the
//! large-deviations machinery behind the predicted constants.

pub mod benford;
pub mod error;
pub mod ld;
pub mod maps;
pub mod numeric;
pub mod orbit_stats;
pub mod padic;
pub mod rng;
pub mod stochastic;
pub mod symdyn;
pub mod trees;

pub use error::{Error, Result};
pub use maps::{iterate, ord2, MapSpec, Orbit, StopCondition, Variant};

/// Version reported in CLI output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
