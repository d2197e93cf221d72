//! Ternary syndrome decoding in large weight.
//!
//! Exact GF(3) arithmetic, random instances with exhaustive oracles, the
//! PGE+SS solve loop with Prange, Wagner and representation engines, and an
//! asymptotic cost estimator. The crate is `no_std` and needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod estimator;
pub mod f3;
pub mod instances;
pub mod math;
pub mod pgess;
pub mod reps;
pub mod rng;
pub mod wagner;

pub use error::Error;
pub use f3::{Permutation, TritMatrix, TritVector};
