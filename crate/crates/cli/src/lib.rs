//! Front end for the lapse-cost engine: regenerates the reference tables
//! and the entry-age sweep as CSV, runs single scenarios from TOML files
//! and checks regenerated tables against golden files.

pub mod config;
pub mod error;
pub mod figure;
pub mod format;
pub mod scenario;
pub mod tables;
pub mod verify;

pub use error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "LAPSECOST_WORKERS";
