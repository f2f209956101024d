//! Approximate model counting with self-derived, provably sound parameters.
//!
//! The pipeline is: choose `(thresh, rnd, t)` by minimizing an objective
//! over the reduced parameter space ([`optimize`]), then run the median of
//! `t` hashed cell counts ([`counter`]). [`verify`] checks the error bounds
//! against exhaustive enumeration on tiny formulas.

pub mod bounds;
pub mod cli;
pub mod cnf;
pub mod counter;
pub mod error;
pub mod hash;
pub mod iteration;
pub mod optimize;
pub mod verify;

pub use error::{Error, ParseError, ParseErrorKind, Result};
