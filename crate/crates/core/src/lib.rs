//! Simplification of discrete Morse functions on Lefschetz complexes.
//!
//! A birth-death pair is cancelled by moving it towards the diagonal of the
//! persistence diagram through a sequence of allowed moves and then reversing
//! the gradient path between its two critical cells. Each move is tracked
//! exactly by an incremental update of the lazy reduction `D = R·U` and of
//! its dual, so that pairing and the homological relations between pairs are
//! known at every step.

pub mod cli_io;
pub mod complex_core;
pub mod error;
pub mod fixtures;
pub mod forbidden_regions;
pub mod oracle;
pub mod pairing_relations;
pub mod simplification;
pub mod transposition_engine;
pub mod z2_reduction;

pub use error::{Error, Result};
