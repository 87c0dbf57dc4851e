use std::fmt;

use magfit_core::Error;

/// Input or configuration problem.
pub const EXIT_INPUT: i32 = 2;
/// Numerical failure during fitting or evaluation.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::NoConvergence { .. } | Error::LogisticNoConvergence { .. } => {
                Self::numeric(e.to_string())
            }
            _ => Self::input(e.to_string()),
        }
    }
}
