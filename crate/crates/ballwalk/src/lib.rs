//! Command-line front end for `ballwalk-core`: domain/oracle/data grammars,
//! layered run configuration, a rayon executor, and CSV/JSON/SVG reports.
//!
//! Exit codes: 0 when every check passes, 2 when a statistical check fails,
//! 1 when the run could not be carried out.

pub mod cli;
pub mod config;
pub mod grammar;
pub mod pool;
pub mod report;
pub mod run;
pub mod svg;

pub use config::{Command, RunConfig};
pub use run::{run, write_outputs, Outcome, RunError};
