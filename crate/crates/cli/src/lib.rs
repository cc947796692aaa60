//! Command-line driver for the neontrap solvers.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{Command, NamedTable};
pub use config::{Format, Settings};
pub use error::CliError;
pub use table::{Cell, ResultTable};
