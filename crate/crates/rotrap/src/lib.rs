//! File formats, figure presets and subcommands on top of `rotrap-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
