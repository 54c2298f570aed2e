//! Dataset loaders, on-disk formats, the parallel ablation runner and the
//! pipeline stages of the `gridfeat` command line, on top of
//! [`gridfeat_core`].

pub mod cache;
pub mod commands;
pub mod config;
mod error;
pub mod export;
pub mod loaders;
pub mod runner;
pub mod stream;

pub use error::{Error, Result};
