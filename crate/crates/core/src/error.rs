use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    /// A document parsed but violates a model invariant. `entity` names the
    /// offending concept, agent type, formula or rule.
    #[error("validation error in '{entity}': {message}")]
    Validation { entity: String, message: String },

    #[error("unknown concept '{0}'")]
    UnknownConcept(String),

    #[error("unknown functionality '{0}'")]
    UnknownFunctionality(String),

    #[error("property '{property}' cannot be resolved for '{owner}'")]
    UnresolvableProperty { owner: String, property: String },

    #[error("division by zero while evaluating '{0}'")]
    DivisionByZero(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("agent must have at least one member")]
    EmptyAgent,

    #[error("not a partition of the agent pool: {0}")]
    NotAPartition(String),

    #[error("atom '{0}' does not appear in the source coalition structure")]
    UnknownAtom(String),

    #[error("coalition structures are defined over different pools")]
    PoolMismatch,

    #[error("no functionality assignment for operative agent {0}")]
    MissingAssignment(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    pub(crate) fn validation(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            entity: entity.into(),
            message: message.into(),
        }
    }

    pub(crate) fn unresolvable(owner: impl Into<String>, property: impl Into<String>) -> Self {
        Error::UnresolvableProperty {
            owner: owner.into(),
            property: property.into(),
        }
    }
}
