use std::fmt;
use std::io;
use std::path::Path;

/// Failure of a subcommand, carrying the process exit status.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    NoSolution(String),
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::NoSolution(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::NoSolution(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

impl From<reorg_core::Error> for CliError {
    fn from(e: reorg_core::Error) -> Self {
        match e {
            reorg_core::Error::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<reorg_planner::Error> for CliError {
    fn from(e: reorg_planner::Error) -> Self {
        match e {
            reorg_planner::Error::Model(m) => m.into(),
            reorg_planner::Error::NoCandidate(_) | reorg_planner::Error::NoSolution => {
                CliError::NoSolution(e.to_string())
            }
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
