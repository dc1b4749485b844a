//! Command-line front end and HTTP service over `tipcast-core`.

pub mod args;
pub mod commands;
pub mod config;
pub mod http;

pub use args::Cli;
pub use commands::{run, Output, UsageError};
