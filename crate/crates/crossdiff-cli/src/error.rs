//! CLI error classification onto exit codes: 1 I/O, 2 arguments,
//! 3 numerical failure.

use crossdiff::pm::PmError;
use crossdiff::scheme::CdError;
use crossdiff::solver::SolverError;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Args(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Args(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Args(m) | CliError::Numerical(m) => m,
        }
    }

    pub fn io(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }

    pub fn args(msg: impl Into<String>) -> Self {
        CliError::Args(msg.into())
    }
}

impl From<CdError> for CliError {
    fn from(e: CdError) -> Self {
        match e {
            CdError::InvalidConfig(_) | CdError::HypothesisViolated(_) => {
                CliError::Args(e.to_string())
            }
            CdError::Fem(_) => CliError::Args(e.to_string()),
            CdError::FixedPointStalled { .. } | CdError::Solver(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<PmError> for CliError {
    fn from(e: PmError) -> Self {
        match e {
            PmError::InvalidConfig(_) | PmError::TooSmall { .. } => CliError::Args(e.to_string()),
            PmError::UnstableTimeStep(_) => CliError::Args(e.to_string()),
            PmError::Fem(_) => CliError::Args(e.to_string()),
            PmError::FixedPointStalled { .. } | PmError::Solver(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
