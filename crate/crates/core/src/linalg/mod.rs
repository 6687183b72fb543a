//! Small dense complex linear algebra: products, Kronecker products, a Jacobi
//! Hermitian eigensolver and the spectral functions built on top of it.

mod eigen;
mod matrix;

pub use eigen::{
    eig_hermitian, eig_hermitian_default, expm_i_hermitian, group_by_degeneracy, psd_sqrt,
    SpectralDecomposition, DEFAULT_DEGENERACY_TOL, HERMITIAN_TOL, MAX_SWEEPS, PSD_CLAMP,
};
pub use matrix::{
    inner, kron, kron_vec, norm, orthonormal_completion, partial_transpose_2, ComplexMatrix,
    ComplexScalar,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("expected dimension {expected}, got {actual}")]
    BadDimension { expected: usize, actual: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}
