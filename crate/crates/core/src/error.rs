use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into three groups that the command-line front end maps to
/// distinct exit codes: malformed input (`Validation`-like variants), a
/// mathematical refusal (`NotSelfDual`, `NotAbsolutelyContinuous`), and a
/// numerical tolerance failure (`NotAMember`, `Tolerance`).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} is not unitary (defect {defect:.3e})")]
    NotUnitary { what: String, defect: f64 },

    #[error("{what} is not symmetric (defect {defect:.3e})")]
    NotSymmetric { what: String, defect: f64 },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix has eigenvalue {eigenvalue:.3e} below the allowed threshold")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("{0} is not a conjugation")]
    NotAConjugation(String),

    #[error("C_c(U) is empty: {0}")]
    NotSelfDual(String),

    #[error("reflected measure is not absolutely continuous: atom at angle {theta} has no conjugate partner")]
    NotAbsolutelyContinuous { theta: f64 },

    #[error("conjugation does not commute with U: {0}")]
    NotAMember(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("numerical failure: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
