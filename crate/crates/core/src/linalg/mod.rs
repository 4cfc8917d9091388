//! Dense matrices, SVD, singular value soft-thresholding, matrix norms and
//! the Hermitian eigensolver used by the spin simulator.

mod hermitian;
mod lanczos;
mod matrix;
mod svd;

pub use hermitian::{hermitian_defect, hermitian_eigen, polar_unitary};
pub use lanczos::{partial_svd_above, LinearOperator};
pub use matrix::{ComplexMatrix, DenseMatrix, RealMatrix, Scalar, ScalarKind};
pub use svd::{
    frobenius_norm, nuclear_norm, shrink, shrink_factors, singular_values, spectral_norm, svd,
    SvdFactorization,
};
pub(crate) use svd::{normalize_signs, truncate_shrunk};
