use std::fmt;

use mslz_core::Error as CoreError;

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or input files; exit code 1.
    Config(String),
    /// Simulation or numerical failure, or an output that could not be
    /// written; exit code 2.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidSystem(_)
            | CoreError::DimensionCap { .. }
            | CoreError::ModeIndex { .. }
            | CoreError::InvalidScenario(_)
            | CoreError::InitialState(_)
            | CoreError::CoincidentReferences
            | CoreError::InvalidWaveform(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
