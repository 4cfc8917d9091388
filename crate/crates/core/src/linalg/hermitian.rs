use super::matrix::ComplexMatrix;
use crate::error::{invalid, Error, Result};

/// Eigenvalues (non-decreasing) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Only the lower triangle is read.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if a.rows() != a.cols() {
        return Err(invalid("matrix", format!("eigendecomposition needs a square matrix, got {:?}", a.shape())));
    }
    a.ensure_finite()?;
    let eig = a
        .to_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok((values, ComplexMatrix::from_faer(eig.U())))
}

/// Unitary polar factor `U Vᴴ` of a square matrix `A = U Σ Vᴴ`.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != a.cols() {
        return Err(invalid("matrix", format!("polar factor needs a square matrix, got {:?}", a.shape())));
    }
    a.ensure_finite()?;
    let svd = a.to_faer().svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let u = ComplexMatrix::from_faer(svd.U());
    let v = ComplexMatrix::from_faer(svd.V());
    u.matmul(&v.adjoint())
}

/// `‖A − Aᴴ‖_F`.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    (a - &a.adjoint()).sum_squares().sqrt()
}
