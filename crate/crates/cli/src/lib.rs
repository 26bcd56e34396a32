//! Library side of the `starsync` command-line tool.
//!
//! Experiments are described by a TOML [`spec::ExperimentSpec`]; the
//! [`commands`] module runs them and [`output`] serializes the results with a
//! metadata header that embeds the exact configuration used.

pub mod commands;
pub mod output;
pub mod presets;
pub mod spec;

use starsync_core::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const SOLVER: i32 = 2;
    pub const TOLERANCE: i32 = 3;
}

/// Environment variable consulted for the default sweep worker count.
pub const WORKERS_ENV: &str = "STARSYNC_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => exit::INPUT,
            CliError::Solver(_) => exit::SOLVER,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SiteOutOfRange { .. }
            | CoreError::InvalidConfig { .. }
            | CoreError::InvalidPair { .. }
            | CoreError::InvalidState(_)
            | CoreError::InvalidAxis(_) => CliError::Input(e.to_string()),
            CoreError::NotConverged { .. }
            | CoreError::Degenerate(_)
            | CoreError::Factorization(_)
            | CoreError::StepTooLarge { .. }
            | CoreError::TraceDrift { .. }
            | CoreError::Indeterminate { .. }
            | CoreError::QuadratureNotConverged { .. } => CliError::Solver(e.to_string()),
        }
    }
}

/// How a command that produced output ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Output was written but some check missed its tolerance.
    ToleranceUnmet(String),
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => exit::OK,
            Status::ToleranceUnmet(_) => exit::TOLERANCE,
        }
    }

    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Ok, s) | (s, Status::Ok) => s,
            (Status::ToleranceUnmet(a), Status::ToleranceUnmet(b)) => Status::ToleranceUnmet(format!("{a}; {b}")),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
