use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grade mismatch: expected {expected}, found {found}")]
    GradeMismatch { expected: usize, found: usize },

    #[error("tensor is not antisymmetric")]
    NotAntisymmetric,

    #[error("variable list mismatch between graded polynomials")]
    VariableMismatch,

    #[error("graded polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(usize),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("monomial {0} is not in the basis for this signature")]
    NotInBasis(String),

    #[error("operation is not of classified shape on this witness: {0}")]
    NotClassifiedShape(String),

    #[error("witness family not separating; evaluation matrix:\n{0}")]
    WitnessNotSeparating(String),

    #[error("operation is not natural or exceeds classified space: {0}")]
    NotNatural(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),

    #[error("value is not in the span of the Lie algebra basis")]
    NotInAlgebra,

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("bind error: {0}")]
    Bind(String),

    #[error("{0}")]
    Invalid(String),
}
