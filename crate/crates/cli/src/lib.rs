//! Configuration, sweep orchestration and table output for the `polariton`
//! binary.
//!
//! A run is described by a [`SweepSpec`] resolved from an INI-style file
//! plus command-line overrides, evaluated over its parameter grid by
//! [`run`], and written as CSV and/or JSON with an optional plot
//! description.

pub mod config;
pub mod error;
pub mod modes;
pub mod plot;
pub mod run;
pub mod spec;
pub mod table;

pub use config::RawConfig;
pub use error::CliError;
pub use run::{run, SweepResult};
pub use spec::{Format, Mode, SweepSpec};
pub use table::{Column, Table, Value};
