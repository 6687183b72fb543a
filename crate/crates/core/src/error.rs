use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("the chain of orthogonal states is empty")]
    EmptyChain,
    #[error("off-diagonal overlap vanishes (|overlap| = {0:e})")]
    ZeroOverlap(f64),
    #[error("pure states must be distinct and orthonormal")]
    NotOrthonormal,
    #[error("no sign change of the partial-transpose spectrum on (0, 1]")]
    NoSignChange,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
