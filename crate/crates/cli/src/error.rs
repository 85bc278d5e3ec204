use std::path::Path;

use serde_json::{json, Value};

use crate::config::Violation;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// The config failed to parse.
    Config(String),
    Validation(Vec<Violation>),
    Core(weylchar::Error),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        use weylchar::Error as E;
        match self {
            CliError::Config(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e {
                E::Io(_) | E::Json(_) | E::Format(_) => EXIT_IO,
                E::InvalidParameter { .. }
                | E::DimensionMismatch { .. }
                | E::NonFinite
                | E::WeightNormalization { .. }
                | E::GridMismatch(_) => EXIT_VALIDATION,
                _ => EXIT_NUMERICAL,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_VALIDATION => "validation",
            EXIT_NUMERICAL => "numerical",
            _ => "io",
        }
    }

    /// The machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let (message, violations) = match self {
            CliError::Config(m) | CliError::Io(m) => (m.clone(), vec![]),
            CliError::Validation(v) => (format!("{} violation(s)", v.len()), v.clone()),
            CliError::Core(e) => (e.to_string(), vec![]),
        };
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": message,
                "violations": violations,
            }
        })
    }
}

impl From<weylchar::Error> for CliError {
    fn from(e: weylchar::Error) -> Self {
        CliError::Core(e)
    }
}
