//! Command-line front end for the `nflbo` toolkit.
//!
//! Exit status: 0 success, 1 NFLT counterexample found, 2 configuration or
//! usage error (including an enumeration over the class-size cap), 3
//! external evaluator failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod output;

pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_COUNTEREXAMPLE, EXIT_EVALUATOR, EXIT_OK};
