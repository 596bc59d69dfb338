//! File formats and command implementations for the `screwkit` binary.

pub mod commands;
pub mod format;
