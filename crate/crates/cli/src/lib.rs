//! Command-line front end: scenario runs, table reproduction, oracle
//! verification and activation-time queries.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

/// Reference scenario shipped with the binary.
pub const BUNDLED_SCENARIO: &str = include_str!("../scenarios/paper.json");
