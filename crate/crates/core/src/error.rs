use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or register sizes do not line up.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// An operator expected to be Hermitian is not.
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    /// A gate expected to be unitary is not.
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    /// A state or density matrix failed a numerical validity check.
    #[error("numerical validation failed: {0}")]
    Numerical(String),

    /// Visibility of an all-zero probability curve.
    #[error("visibility is undefined when every probability is zero")]
    UndefinedVisibility,

    /// Invalid circuit construction.
    #[error("invalid circuit: {0}")]
    Circuit(String),

    /// Invalid experiment configuration or preset.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
