//! File formats, experiment protocols, reports and the command-line tool
//! built on `dmt-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod format;
pub mod harness;
pub mod io;
pub mod report;

pub use error::{DmtError, Result};
