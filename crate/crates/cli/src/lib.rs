//! Campaign orchestration, archives and reports for `qidle`.

pub mod analyze;
pub mod archive;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use error::{CliError, CliResult};
