use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("key already present")]
    Duplicate,
    #[error("key not found")]
    NotFound,
    #[error("locator does not refer to a live entry")]
    StaleLocator,
    #[error("key does not fit between its neighbors at the given position")]
    OrderViolation,
    /// An internal invariant the algorithm relies on did not hold. The tree
    /// may be left inconsistent.
    #[error("internal contract violation: {0}")]
    Contract(String),
}

impl TreeError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        TreeError::Contract(msg.into())
    }
}
