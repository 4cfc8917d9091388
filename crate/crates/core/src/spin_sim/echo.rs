//! Four-pulse stimulated-echo ESEEM.
//!
//! Pulses are ideal π/2 rotations about x on the dressed `{m_s = 0,
//! m_s = −1}` pair, identity on the nuclei. The echo pathway is selected by
//! coherence order, as a phase cycle would: order +1 after the first pulse,
//! 0 after the second, −1 after the third, and the `m_s = 0` population is
//! read after the fourth. Together with its mirror image this gives
//!
//! ```text
//! S(τ1, τ2) = Re[f(τ1+τ2, τ1) + f(τ1, τ1+τ2)] / (8d)
//! f(s, t)   = Tr[U_α(s) U_β(t) U_α(s)ᴴ U_β(t)ᴴ]
//! ```
//!
//! with `U_α`, `U_β` the nuclear propagators of the two manifolds and `d`
//! the nuclear dimension. In the α eigenbasis `f(s, t) = Σ_ik
//! e^{−i(ε_i−ε_k)s} |W_ik(t)|²` where `W(t) = V_αᴴ U_β(t) V_α`, so each grid
//! point costs O(d²) once `|W|²` is known for the row.

use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::{manifold_hamiltonians, ManifoldHamiltonians, HALF_SQRT2};
use super::system::{EseemGrid, SpinSystem};
use crate::error::Result;
use crate::linalg::{hermitian_eigen, ComplexMatrix, RealMatrix};
use std::f64::consts::TAU;

/// Non-fatal conditions found while simulating.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationWarning {
    /// A modulation frequency along `axis` (1 or 2) exceeds the Nyquist
    /// frequency of that axis and will alias.
    AboveNyquist { axis: u8, frequency_hz: f64, nyquist_hz: f64 },
}

impl std::fmt::Display for SimulationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimulationWarning::AboveNyquist {
                axis,
                frequency_hz,
                nyquist_hz,
            } => write!(
                f,
                "axis {axis}: modulation at {:.4} MHz exceeds the Nyquist frequency {:.4} MHz",
                frequency_hz / 1e6,
                nyquist_hz / 1e6
            ),
        }
    }
}

/// Mean-subtracted time-domain signal plus simulation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EseemSignal {
    pub signal: RealMatrix,
    pub warnings: Vec<SimulationWarning>,
}

/// Diagonalised manifold Hamiltonians.
#[derive(Debug, Clone)]
pub struct EchoModel {
    d: usize,
    eps_alpha: Vec<f64>,
    eps_beta: Vec<f64>,
    v_alpha: ComplexMatrix,
    v_beta: ComplexMatrix,
    /// `V_αᴴ V_β`.
    overlap: ComplexMatrix,
}

fn phases(eps: &[f64], t: f64) -> Vec<Complex64> {
    eps.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect()
}

/// `|(A diag(p) Aᴴ)_ik|²`.
fn squared_moduli(a: &ComplexMatrix, p: &[Complex64]) -> Vec<f64> {
    let d = p.len();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let w: Complex64 = (0..d).map(|j| a[(i, j)] * p[j] * a[(k, j)].conj()).sum();
            out[i * d + k] = w.norm_sqr();
        }
    }
    out
}

/// `Re Σ_ik e^{−i(ε_i−ε_k)s} K_ik`.
fn phase_sum(eps: &[f64], k: &[f64], s: f64) -> f64 {
    let d = eps.len();
    let p = phases(eps, s);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..d {
        let row: Complex64 = (0..d).map(|l| p[l].conj() * k[i * d + l]).sum();
        total += p[i] * row;
    }
    total.re
}

impl EchoModel {
    pub fn new(blocks: &ManifoldHamiltonians) -> Result<Self> {
        let (eps_alpha, v_alpha) = hermitian_eigen(&blocks.alpha)?;
        let (eps_beta, v_beta) = hermitian_eigen(&blocks.beta)?;
        let overlap = v_alpha.adjoint().matmul(&v_beta)?;
        Ok(Self {
            d: eps_alpha.len(),
            eps_alpha,
            eps_beta,
            v_alpha,
            v_beta,
            overlap,
        })
    }

    pub fn nuclear_dim(&self) -> usize {
        self.d
    }

    /// Nuclear transition frequencies `|ε_i − ε_k|/2π` (i < k) of the α and
    /// β manifolds, Hz.
    pub fn nuclear_frequencies(&self) -> (Vec<f64>, Vec<f64>) {
        let diffs = |e: &[f64]| {
            let mut out = Vec::new();
            for i in 0..e.len() {
                for k in i + 1..e.len() {
                    out.push((e[i] - e[k]).abs() / TAU);
                }
            }
            out
        };
        (diffs(&self.eps_alpha), diffs(&self.eps_beta))
    }

    /// Modulation components of the echo signal, before merging equal
    /// frequencies: `(ν1, ν2, weight)` in Hz, with `weight` the modulus of
    /// the complex amplitude relative to the constant part.
    ///
    /// The first pathway term carries `e^{−iΔα_ik(τ1+τ2)} e^{−iΔβ_jl τ1}` with
    /// amplitude `M_ij M̄_kj M̄_il M_kl`; the second swaps the manifolds and
    /// reverses the sign of the τ1-only phase.
    pub fn components(&self) -> Vec<(f64, f64, f64)> {
        let d = self.d;
        let m = &self.overlap;
        let mut out = Vec::with_capacity(2 * d.pow(4));
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        let w = (m[(i, j)] * m[(k, j)].conj() * m[(i, l)].conj() * m[(k, l)]).norm() / d as f64;
                        let da = (self.eps_alpha[i] - self.eps_alpha[k]) / TAU;
                        let db = (self.eps_beta[j] - self.eps_beta[l]) / TAU;
                        out.push((da + db, da, w));
                        out.push((db - da, db, w));
                    }
                }
            }
        }
        out
    }

    /// Largest `|ν1|` and `|ν2|` among components with relative weight above
    /// 1e-6, Hz.
    pub fn max_frequencies(&self) -> (f64, f64) {
        self.components()
            .into_iter()
            .filter(|c| c.2 > 1e-6)
            .fold((0.0, 0.0), |(a, b), (f1, f2, _)| (f64::max(a, f1.abs()), f64::max(b, f2.abs())))
    }

    /// Selected echo signal (before mean removal) on the whole grid.
    pub fn signal(&self, grid: &EseemGrid) -> RealMatrix {
        let d = self.d;
        let vh = self.overlap.adjoint();
        let norm = 1.0 / (8.0 * d as f64);
        let rows: Vec<Vec<f64>> = (0..grid.n1)
            .into_par_iter()
            .map(|i| {
                let t1 = grid.tau1(i);
                // |V_αᴴ U_β(τ1) V_α|² and |V_βᴴ U_α(−τ1) V_β|².
                let k_alpha = squared_moduli(&self.overlap, &phases(&self.eps_beta, t1));
                let k_beta = squared_moduli(&vh, &phases(&self.eps_alpha, -t1));
                (0..grid.n2)
                    .map(|j| {
                        let s = t1 + grid.tau2(j);
                        norm * (phase_sum(&self.eps_alpha, &k_alpha, s) + phase_sum(&self.eps_beta, &k_beta, s))
                    })
                    .collect()
            })
            .collect();
        RealMatrix::from_fn(grid.n1, grid.n2, |i, j| rows[i][j])
    }

    /// `U(t) = V diag(e^{−iεt}) Vᴴ` for one manifold.
    fn propagator(&self, beta: bool, t: f64) -> ComplexMatrix {
        let (eps, v) = if beta {
            (&self.eps_beta, &self.v_beta)
        } else {
            (&self.eps_alpha, &self.v_alpha)
        };
        let p = phases(eps, t);
        ComplexMatrix::from_fn(self.d, self.d, |i, k| (0..self.d).map(|j| v[(i, j)] * p[j] * v[(k, j)].conj()).sum())
    }

    /// Full density matrix after the four-pulse sequence, without pathway
    /// selection. `pulse_phases` are the rotation-axis angles in the xy
    /// plane; the basis is `m_s = 0` ⊗ nuclei, then `m_s = −1` ⊗ nuclei.
    pub fn propagate(&self, tau1: f64, tau2: f64, pulse_phases: [f64; 4]) -> Result<ComplexMatrix> {
        let d = self.d;
        let n = 2 * d;
        let free = |t: f64| {
            let (ua, ub) = (self.propagator(false, t), self.propagator(true, t));
            ComplexMatrix::from_fn(n, n, |r, c| match (r < d, c < d) {
                (true, true) => ua[(r, c)],
                (false, false) => ub[(r - d, c - d)],
                _ => Complex64::new(0.0, 0.0),
            })
        };
        let pulse = |phi: f64| {
            let e = ComplexMatrix::new(
                2,
                2,
                vec![
                    Complex64::new(HALF_SQRT2, 0.0),
                    Complex64::new(0.0, -HALF_SQRT2) * Complex64::from_polar(1.0, -phi),
                    Complex64::new(0.0, -HALF_SQRT2) * Complex64::from_polar(1.0, phi),
                    Complex64::new(HALF_SQRT2, 0.0),
                ],
            )
            .expect("2x2");
            e.kron(&ComplexMatrix::identity(d))
        };
        let mut rho = ComplexMatrix::from_fn(n, n, |r, c| {
            if r == c && r < d {
                Complex64::new(1.0 / d as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let apply = |rho: &ComplexMatrix, u: &ComplexMatrix| -> Result<ComplexMatrix> { u.matmul(rho)?.matmul(&u.adjoint()) };
        let delays = [tau1, tau2, tau1];
        for (k, &phi) in pulse_phases.iter().enumerate() {
            rho = apply(&rho, &pulse(phi))?;
            if let Some(&t) = delays.get(k) {
                rho = apply(&rho, &free(t))?;
            }
        }
        Ok(rho)
    }
}

/// Population of `m_s = 0` in a density matrix from [`EchoModel::propagate`].
pub fn zero_population(rho: &ComplexMatrix) -> Complex64 {
    let d = rho.rows() / 2;
    (0..d).map(|k| rho[(k, k)]).sum()
}

/// Simulated 2D ESEEM signal of `system` on `grid`, mean subtracted.
///
/// Rows index τ1 and columns τ2. Modulation frequencies above either
/// axis' Nyquist frequency are reported in `warnings`; the signal is still
/// returned.
pub fn eseem_signal(system: &SpinSystem, grid: &EseemGrid) -> Result<EseemSignal> {
    grid.validate()?;
    let blocks = manifold_hamiltonians(system)?;
    let model = EchoModel::new(&blocks)?;
    let mut signal = model.signal(grid);
    let mean = signal.mean();
    signal.as_mut_slice().iter_mut().for_each(|x| *x -= mean);

    let mut warnings = Vec::new();
    let (f1, f2) = model.max_frequencies();
    let (n1, n2) = grid.nyquist();
    for (axis, f, ny) in [(1u8, f1, n1), (2, f2, n2)] {
        if f > ny {
            warnings.push(SimulationWarning::AboveNyquist {
                axis,
                frequency_hz: f,
                nyquist_hz: ny,
            });
        }
    }
    Ok(EseemSignal { signal, warnings })
}
