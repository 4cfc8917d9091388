use super::matrix::{RealMatrix, Scalar};
use super::DenseMatrix;
use crate::error::{invalid, Error, Result};

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`.
///
/// `u` is `m×k`, `v` is `n×k` and `singular_values` is non-increasing.
/// Each singular pair is sign-normalised so that the largest-magnitude entry
/// of every column of `u` is positive (first such entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactorization {
    pub u: RealMatrix,
    pub singular_values: Vec<f64>,
    pub v: RealMatrix,
}

impl SvdFactorization {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// Number of singular values strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.singular_values.iter().take_while(|&&s| s > threshold).count()
    }

    /// `U diag(weights) Vᵀ` using the first `weights.len()` triplets.
    pub fn reconstruct_with(&self, weights: &[f64]) -> RealMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = RealMatrix::zeros(m, n);
        let k = weights.len().min(self.len());
        for i in 0..m {
            let dst = &mut out.as_mut_slice()[i * n..(i + 1) * n];
            for l in 0..k {
                let a = self.u[(i, l)] * weights[l];
                if a == 0.0 {
                    continue;
                }
                for (j, d) in dst.iter_mut().enumerate() {
                    *d += a * self.v[(j, l)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.reconstruct_with(&self.singular_values)
    }
}

/// Flips singular pairs so the largest-magnitude entry of each `u` column is positive.
pub(crate) fn normalize_signs(u: &mut RealMatrix, v: &mut RealMatrix) {
    for l in 0..u.cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..u.rows() {
            let x = u[(i, l)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..u.rows() {
                u[(i, l)] = -u[(i, l)];
            }
            for j in 0..v.rows() {
                v[(j, l)] = -v[(j, l)];
            }
        }
    }
}

/// Thin SVD of a finite real matrix.
pub fn svd(a: &RealMatrix) -> Result<SvdFactorization> {
    a.ensure_finite()?;
    let decomposition = a
        .to_faer()
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let mut u = RealMatrix::from_faer(decomposition.U());
    let mut v = RealMatrix::from_faer(decomposition.V());
    let s = decomposition.S().column_vector();
    let singular_values: Vec<f64> = (0..s.nrows()).map(|i| s[i].max(0.0)).collect();
    normalize_signs(&mut u, &mut v);
    Ok(SvdFactorization {
        u,
        singular_values,
        v,
    })
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &RealMatrix) -> Result<Vec<f64>> {
    a.ensure_finite()?;
    let mut s = a
        .to_faer()
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    for x in &mut s {
        *x = x.max(0.0);
    }
    Ok(s)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("threshold must be finite and non-negative, got {tau}")));
    }
    Ok(())
}

/// Soft-thresholded factors: the triplets with `σ > tau`, shrunk by `tau`.
pub fn shrink_factors(a: &RealMatrix, tau: f64) -> Result<SvdFactorization> {
    check_tau(tau)?;
    let full = svd(a)?;
    Ok(truncate_shrunk(full, tau))
}

pub(crate) fn truncate_shrunk(mut f: SvdFactorization, tau: f64) -> SvdFactorization {
    let r = f.count_above(tau);
    let shrunk: Vec<f64> = f.singular_values[..r].iter().map(|s| s - tau).collect();
    let keep = |m: &RealMatrix| RealMatrix::from_fn(m.rows(), r.max(1), |i, l| if l < r { m[(i, l)] } else { 0.0 });
    f.u = keep(&f.u);
    f.v = keep(&f.v);
    f.singular_values = shrunk;
    f
}

/// Singular value soft-thresholding `U diag(max(σ − τ, 0)) Vᵀ`.
pub fn shrink(a: &RealMatrix, tau: f64) -> Result<RealMatrix> {
    Ok(shrink_factors(a, tau)?.reconstruct())
}

/// `sqrt(Σ |a_ij|²)`.
pub fn frobenius_norm<T: Scalar>(a: &DenseMatrix<T>) -> Result<f64> {
    a.ensure_finite()?;
    Ok(a.sum_squares().sqrt())
}

/// Largest singular value.
pub fn spectral_norm(a: &RealMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Sum of singular values (trace norm).
pub fn nuclear_norm(a: &RealMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}
