//! Configuration, artifacts, ensembles and commands of the `ferro` CLI.
//!
//! The numerical core lives in `ferro-spectral`; this crate adds the
//! executable surface around it:
//!
//! - [`config`]: strict TOML schema, validation, canonical echo and hash.
//! - [`trajectory`]: binary trajectory files with a text header.
//! - [`ledger_csv`]: ledger and report CSVs.
//! - [`ensemble`]: rayon ensembles in deterministic member order.
//! - [`commands`]: `simulate`, `verify`, `sweep`, `inspect`.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod ledger_csv;
pub mod trajectory;

pub use commands::{cmd_inspect, cmd_simulate, cmd_sweep, cmd_verify, AuditLine, CliError, Outcome};
pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
