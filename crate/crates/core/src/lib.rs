// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Coverage analysis of two-tier mmWave heterogeneous networks in which
//! small cells are thinned by sector-shaped exclusion zones around each
//! macro base station.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
