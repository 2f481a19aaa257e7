use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] reorg_core::Error),

    /// No requirement could be covered under the given bounds.
    #[error("no candidate: {0}")]
    NoCandidate(String),

    #[error("no solution found within the search budget")]
    NoSolution,
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model(reorg_core::Error::Validation {
            entity: path.into(),
            message: message.into(),
        })
    }

    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Model(reorg_core::Error::Parse(message.into()))
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Model(reorg_core::Error::Domain(message.into()))
    }
}
