//! Sweep driver: config loading, grid expansion, batch execution and result
//! files for the hold-up simulation.

pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod run;
pub mod tables;

pub use config::{load_config, SweepSpec};
pub use error::{CliError, Result};
pub use grid::{expand_grid, Cell};
pub use run::{execute, ExecOptions, Report};
