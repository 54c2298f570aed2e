//! Core of the gridfeat household load-forecasting benchmark.
//!
//! Everything here is pure computation over in-memory data and builds
//! without `std`: the feature taxonomy and descriptor vocabulary, hourly
//! resampling, a synthetic household generator, leakage-safe feature
//! engineering, the forecasting models, exact TreeSHAP attribution, the
//! evaluation metrics and the feature-group ablation grid.
//!
//! File formats, dataset adapters, parallel execution and the command line
//! live in the `gridfeat` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ablation;
pub mod calendar;
mod error;
pub mod explain;
pub mod frame;
mod linalg;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod report;
pub mod resample;
pub mod schema;
pub mod solar;
pub mod synth;
pub mod window;

pub use error::{Error, Result};
