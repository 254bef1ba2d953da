//! Library side of the `torus-filippov` command-line tool.
//!
//! Every subcommand is a function in [`commands`] returning an [`Outcome`]:
//! the text for stdout, any warnings, and the run report. The binary only
//! parses arguments and routes these to the terminal and files.

pub mod commands;
pub mod document;
pub mod report;
pub mod svg;
pub mod sweep;

use thiserror::Error;

pub use document::SystemDocument;
pub use report::RunReport;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<torus_filippov::Error> for CliError {
    fn from(e: torus_filippov::Error) -> Self {
        match e {
            torus_filippov::Error::CrossingOnInelastic { .. } => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// What a command produced besides the files it wrote.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub report: RunReport,
}
