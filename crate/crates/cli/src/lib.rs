//! Scenario files and subcommands behind the `peakonlab` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` is newer than the supported toolchain.
#![allow(clippy::manual_is_multiple_of)]

pub mod commands;
pub mod config;

pub use commands::{CliError, ProbeRecord, SnapshotSelector};
pub use config::{ConfigError, Scenario};
