//! Training-data valuation toolkit.
//!
//! Treats each training point as a player in a cooperative game whose
//! utility is a service model's prediction confidence, and provides exact
//! enumeration, Monte Carlo, kernel-regression, and amortized-explainer
//! estimators of the resulting Shapley values, together with grouped
//! (coalition-structure) variants and data-removal evaluation.

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod explainer;
pub mod grouping;
pub mod model;
pub mod rng;
pub mod runner;
pub mod shapley;
pub mod utility;

pub use error::{Error, Result};
