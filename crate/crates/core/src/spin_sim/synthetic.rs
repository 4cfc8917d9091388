use std::f64::consts::TAU;

use super::system::EseemGrid;
use crate::error::{invalid, Error, Result};
use crate::linalg::RealMatrix;

/// One separable cosine component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticPeak {
    /// Frequency along τ1, Hz.
    pub nu1: f64,
    /// Frequency along τ2, Hz.
    pub nu2: f64,
    pub amplitude: f64,
    /// Phase along τ1, radians.
    pub phase: f64,
}

/// `M(i, j) = Σ_k a_k cos(2π ν1_k τ1(i) + φ_k) cos(2π ν2_k τ2(j))`.
///
/// Each term is an outer product, so the rank is at most the number of
/// peaks. Frequencies above either axis' Nyquist frequency are rejected.
pub fn synthetic_low_rank_signal(peaks: &[SyntheticPeak], grid: &EseemGrid) -> Result<RealMatrix> {
    grid.validate()?;
    if peaks.is_empty() {
        return Err(invalid("peaks", "need at least one peak"));
    }
    let (ny1, ny2) = grid.nyquist();
    for p in peaks {
        if ![p.nu1, p.nu2, p.amplitude, p.phase].iter().all(|x| x.is_finite()) {
            return Err(invalid("peaks", "peak parameters must be finite"));
        }
        for (f, ny) in [(p.nu1, ny1), (p.nu2, ny2)] {
            if f.abs() > ny {
                return Err(Error::AboveNyquist {
                    frequency_hz: f,
                    nyquist_hz: ny,
                });
            }
        }
    }
    let mut m = RealMatrix::zeros(grid.n1, grid.n2);
    for p in peaks {
        let a: Vec<f64> = (0..grid.n1)
            .map(|i| p.amplitude * (TAU * p.nu1 * grid.tau1(i) + p.phase).cos())
            .collect();
        let b: Vec<f64> = (0..grid.n2).map(|j| (TAU * p.nu2 * grid.tau2(j)).cos()).collect();
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m[(i, j)] += ai * bj;
            }
        }
    }
    Ok(m)
}
