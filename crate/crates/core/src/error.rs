use thiserror::Error;

use crate::poly::VarId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable `{0}` is not covered by the pair signature")]
    SignatureMismatch(VarId),
    #[error("variable `{0}` does not belong to the source frame of the map")]
    VariableMismatch(VarId),
    #[error("invalid pair signature: {0}")]
    InvalidSignature(String),
    #[error("variable `{0}` is not one of the variables of this object")]
    UnknownVariable(VarId),
    #[error("star-commutator is not divisible by hbar: {0}")]
    NotDivisibleByHbar(String),
    #[error("singular parameters: {0}")]
    SingularParameters(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("negative index {0}")]
    NegativeIndex(i64),
    #[error("not a quadratic form: {0}")]
    NotQuadratic(String),
    #[error("exponent mismatch: {0}")]
    ExponentMismatch(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("integrand does not decay: {0}")]
    NonDecaying(String),
    #[error("quadrature under-resolved: {0}")]
    UnderResolved(String),
    #[error("state is not normalizable: {0}")]
    NonNormalizable(String),
    #[error("reference point is a node of the state: {0}")]
    NodeAtReference(String),
    #[error("value is not exactly representable: {0}")]
    NotRepresentable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
