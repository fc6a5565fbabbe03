//! Exact toric computations of the stability threshold `δ`, the global log
//! canonical threshold `α`, their finite-level approximants, and the
//! filtration and monomial-ideal combinatorics around them.
//!
//! All arithmetic is over exact rationals.

pub mod budget;
pub mod config;
pub mod error;
pub mod filtration;
pub mod geometry;
pub mod invariants;
pub mod rational;
pub mod sweep;
pub mod toric;

pub use budget::Budget;
pub use error::{Error, Result};
pub use geometry::{AffineFunctional, HalfSpace, LatticePoint, MPoint, NVector, Polytope, Simplex};
pub use invariants::{Classification, PairReport, Verdict};
pub use rational::{Extended, Rational};
pub use toric::{ToricDivisor, ToricPair, ToricPairSpec};
