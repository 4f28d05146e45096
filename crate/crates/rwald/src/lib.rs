//! Robust Wald-type detection for single-snapshot colocated MIMO radar under
//! correlated, possibly heavy tailed clutter.
//!
//! The crate is organized around the detection pipeline: [`geometry`] builds
//! virtual array steering vectors, [`disturbance`] generates clutter and
//! provides its exact second-order analytics, [`detector`] computes the
//! robust Wald statistic from a single snapshot, [`theory`] supplies the
//! asymptotic false-alarm and detection probabilities, and [`montecarlo`]
//! validates the two against each other with a deterministic, parallel
//! trial engine. [`presets`] holds the two built-in clutter scenarios.

pub mod detector;
pub mod disturbance;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod presets;
pub mod theory;

pub use error::{Error, Result};
