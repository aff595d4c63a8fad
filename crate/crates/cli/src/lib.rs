//! Library side of the `wrmm` command: config loading, the four commands and
//! their file outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use commands::{prepare, Outcome, Overrides};
pub use config::RunConfig;
pub use error::CliError;
