//! Files, campaigns and the `heatlab` command line on top of `heatlab-core`.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod formats;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
