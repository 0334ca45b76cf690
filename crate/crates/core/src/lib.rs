//! Symmetry-preserving difference schemes for second- and third-order ODEs
//! invariant under two realizations of `sl(2,R)` on the half-plane `x > 0`,
//! with standard baselines, exact solutions and an experiment harness.

pub mod baselines;
pub mod exact;
pub mod group;
pub mod harness;
pub mod invariants;
pub mod schemes;
pub mod types;

pub use types::*;
