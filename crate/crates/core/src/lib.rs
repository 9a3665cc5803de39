//! Downlink SINR coverage of millimeter-wave cellular networks.
//!
//! The crate has three halves that are meant to be cross-checked against
//! each other:
//!
//! * a system-level Monte Carlo simulator ([`montecarlo`]) that drops
//!   Poisson base-station fields ([`geometry`]), draws cluster/subpath
//!   channels ([`channel`]) and combines them with planar-array beam
//!   patterns ([`antenna`]);
//! * the aligned/misaligned gain laws and a histogram-RMSE fitter
//!   ([`gains`]);
//! * numerical evaluation of the stochastic-geometry coverage integrals
//!   ([`analytic`]).
//!
//! Coverage curves from either side share one type ([`curve::CoverageCurve`])
//! and one CSV schema.

pub mod analytic;
pub mod antenna;
pub mod channel;
pub mod curve;
pub mod error;
pub mod exec;
pub mod gains;
pub mod geometry;
pub mod montecarlo;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
