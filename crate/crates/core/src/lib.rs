//! Quantum decision theory engine.
//!
//! Intended actions are modelled as factors of a finite-dimensional complex
//! state space. A prospect's probability is the squared overlap of its state
//! with the decision maker's strategic state, and splits exactly into a
//! utility factor and an attraction (interference) factor. On top of that
//! kernel sit amplitude calibration from targets, numeric checkers for the
//! classical decision paradoxes, a deterministic Monte Carlo sampler, and a
//! JSON scenario format.

pub mod calibration;
pub mod error;
pub mod mindspace;
pub mod paradox;
pub mod probability;
pub mod sampler;
pub mod scenario;

pub use error::{Category, Error, Result};

/// Tolerance for exact identities such as `p = utility + q`.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for aggregate normalizations summed over a lattice.
pub const AGGREGATE_TOL: f64 = 1e-10;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Overridable numeric tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub aggregate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: IDENTITY_TOL, aggregate: AGGREGATE_TOL }
    }
}
