//! Error channel for the binary, folded down to the three exit codes the
//! harness promises: 1 for usage problems (bad flags, invalid parameters,
//! failed experiment assertions), 2 for data problems (unreadable or
//! malformed point-set files), 3 for analytic-regime violations surfaced by
//! the library.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an internal check the caller can fix by rerunning
    /// with different parameters. Exit code 1.
    Usage(String),
    /// The input file could not be read or parsed. Exit code 2.
    Data(String),
    /// A requested bound lies outside its validity regime. Exit code 3.
    Regime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Regime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Regime(msg) => write!(f, "regime violation: {msg}"),
        }
    }
}

impl From<cjl::error::Error> for CliError {
    fn from(e: cjl::error::Error) -> CliError {
        match e {
            cjl::error::Error::RegimeViolation(msg) => CliError::Regime(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
