//! Scenario runner behind the `ncone` binary.
//!
//! A scenario is a JSON document naming one command and its parameters. A run
//! writes CSV tables, `report.json` and `manifest.json` into the output
//! directory. The exit status is 0 when every check passed, 1 when some check
//! failed, 2 when the input could not be read.

pub mod io;
pub mod run;
pub mod scenario;

pub use run::{execute, run, write_artifacts, Outcome};
pub use scenario::{Command, Overrides, Scenario};

/// Unreadable or malformed input, with a location such as `file:line:col`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl InputError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { location: location.into(), message: message.into() }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for InputError {}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
