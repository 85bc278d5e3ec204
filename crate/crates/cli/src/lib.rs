//! Config-driven batch front end for the `weylchar` library.

pub mod config;
pub mod error;
pub mod run;

use std::path::Path;

pub use config::{validate, JobConfig, Task, Violation};
pub use error::CliError;
pub use run::{run, Outcome};

/// Reads and parses a JSON job config.
pub fn load_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
