//! Allocation-only core of a curriculum laboratory for unsupervised environment
//! design.
//!
//! Everything in this crate is pure computation over owned values: the
//! level-parameterized environment interface, a partially observable maze
//! family, a softmax-linear actor-critic learner, observed-state
//! representatives with state-aware diversity scores, the prioritized level
//! buffer, and the strategy drivers (self-play diversity curriculum, domain
//! randomization, prioritized level replay, minimax and PAIRED baselines).
//!
//! File formats, configuration and the command line live in the `ued-lab`
//! companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod curriculum;
pub mod diversity;
pub mod env;
pub mod error;
pub mod learner;
mod math;
pub mod maze;
pub mod strategies;

pub use error::{Error, Result};

/// Deterministic generator used for every stochastic decision in a run.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the run generator from an explicit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
