use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matrix or scheme dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The requested object exceeds the dense-storage capacity limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A stated hypothesis of the quantity being computed does not hold;
    /// the caller should report the case as skipped, not failed.
    #[error("precondition not satisfied: {0}")]
    Precondition(String),

    /// The Gram matrix of the symmetric group is singular (d < k).
    #[error("singular Gram matrix: {0}")]
    SingularGram(String),

    /// The attack kind does not apply to the given scheme parameters.
    #[error("unsupported attack: {0}")]
    UnsupportedAttack(String),

    /// An input matrix violates a structural invariant (non-finite entries,
    /// non-Hermitian, wrong trace, negative spectrum).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

pub type Result<T> = std::result::Result<T, Error>;
