//! Causal structure learning with non-invertible functional relationships.
//!
//! The crate fits two-piece linear structural equation models in both
//! directions of a variable pair, tests whether one direction is
//! significantly preferred, and folds that test into graph learning on top
//! of a linear learner (stable PC, or any externally supplied PDAG).
//!
//! Everything here is `no_std` with `alloc`; file formats, reports and the
//! command-line front end live in the companion `nncl` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod bivariate;
pub mod consensus;
pub mod data;
pub mod direction;
pub mod exec;
pub mod graph;
pub mod nncl;
pub mod metrics;
pub mod orient;
pub mod pc;
pub mod piecewise;
pub mod simulate;
pub mod stats;

pub use bivariate::{bivariate_discover, BivariateConfig, EdgeKind, EdgeVerdict};
pub use data::Dataset;
pub use direction::{DirectionTest, Method, NullData, Orientation, TestConfig};
pub use error::{Error, Result};
pub use graph::{Mark, Pdag};
pub use piecewise::{PiecewiseFit, QuantileGrid};
pub use stats::RngStream;
