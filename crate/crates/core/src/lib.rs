//! Probabilistic finite-element model updating from incomplete modal data.
//!
//! The pipeline: Latin-hypercube pre-screening of the posterior, K-means
//! seeding of several Metropolis-Hastings chains, lockstep evolution with
//! adaptive proposal widths and merging of chains that converge to the same
//! optimum, and joint-histogram analysis of the surviving chains.

// `!(x > 0.0)` style checks must also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchmark;
pub mod config;
pub mod error;
pub mod fe;
pub mod objective;
pub mod orchestrator;
pub mod params;
pub mod rng;
pub mod sampler;
pub(crate) mod serde_rows;

pub use error::{Error, Result};
pub use params::{ParameterVector, SearchBox};
