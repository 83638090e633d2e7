//! Boundary localization by signed-distance regression, with a peak-picking
//! baseline, adaptive-depth cost modelling, regression calibration metrics and
//! a deterministic Monte-Carlo harness for estimator variance studies.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atr;
pub mod calib;
mod error;
pub mod estimators;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
