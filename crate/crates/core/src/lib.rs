//! Finite-precision dynamics of the tent map.
//!
//! Iterates `x -> a·x` (for `x < N/2`) and `x -> a·(N - x)` under exact
//! rational, fixed-point binary, binary64 and binary32 arithmetic, and
//! measures how computed orbits part ways with the exact ones: cycle
//! detection, accumulated error, integer preimage trees, random backward
//! walks and invariant-density histograms.

pub mod binary;
pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod preimage;
pub mod rational;
pub mod rng;

pub use binary::{FixedBinary, IntegerClass, PrecisionSpec};
pub use dynamics::{Backend, OrbitOutcome, OrbitReport, TentMap, TentParams, Value};
pub use error::{Error, Result};
pub use rational::{parse_decimal, ExactRational};
