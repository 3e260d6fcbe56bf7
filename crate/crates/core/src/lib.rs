//! Percolation exploration paths, cluster-boundary loops and SLE(6) on the
//! hexagonal lattice.

pub mod construction;
pub mod domain;
pub mod error;
pub mod exploration;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod oracle;
pub mod sle;
pub mod stats;

pub use error::{Error, Result};
