//! Command-line front end: reads systems from JSON files, runs the exact
//! analyzer and prints one JSON report per invocation.

pub mod commands;
pub mod format;
pub mod report;

use thiserror::Error;

pub use commands::{run, Cli, Command, LevelArg, Outcome, Verdict};
pub use format::{parse_csv_vector, CertificateFile, SystemFile};
pub use report::{BenchRow, CardinalityCount, EnumeratedSet, ExactValue, Payload, Report};

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input.
    #[error("input error: {0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<hoffman_core::CoreError> for CliError {
    fn from(e: hoffman_core::CoreError) -> Self {
        CliError::Internal(e.to_string())
    }
}
