//! Steerability of two-qubit states under finitely many projective
//! measurements.
//!
//! The central quantity is the steering radius: for a fixed list of
//! measurement axes, [`lhs::min_max_radius`] finds the smallest possible
//! largest Bloch radius among hidden states of a local-hidden-state model
//! reproducing the conditional states; [`search::steering_radius`] maximizes
//! it over the axes. A radius above one means no physical model exists and
//! the measuring party steers the other.

pub mod assemblage;
pub mod criteria;
pub mod error;
pub mod lhs;
pub mod qubit;
pub mod scan;
pub mod search;
pub mod stats;
pub mod states;

pub use error::{Error, Result};
