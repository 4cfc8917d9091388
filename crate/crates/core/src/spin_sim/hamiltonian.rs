use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;

use super::system::SpinSystem;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, polar_unitary, ComplexMatrix};

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// ¹³C gyromagnetic ratio γ/2π, Hz/T.
pub const GAMMA_13C: f64 = 10.7084e6;
/// ¹⁴N gyromagnetic ratio γ/2π, Hz/T.
pub const GAMMA_14N: f64 = 3.077e6;

const GAUSS: f64 = 1e-4;

/// Electron gyromagnetic ratio `g μ_B / ħ` in rad/s per gauss.
pub fn electron_gamma(g: f64) -> f64 {
    g * BOHR_MAGNETON / (PLANCK / TAU) * GAUSS
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(S_x, S_y, S_z)` for spin `s` in the basis `m = s, s−1, …, −s`.
pub(crate) fn spin_operators(twice_s: usize) -> [ComplexMatrix; 3] {
    let dim = twice_s + 1;
    let s = twice_s as f64 / 2.0;
    let m = |k: usize| s - k as f64;
    // ⟨m+1|S+|m⟩ = sqrt(s(s+1) − m(m+1)); row k−1 holds m(k)+1.
    let plus = ComplexMatrix::from_fn(dim, dim, |r, col| {
        if col == r + 1 {
            c((s * (s + 1.0) - m(col) * (m(col) + 1.0)).sqrt())
        } else {
            c(0.0)
        }
    });
    let minus = plus.adjoint();
    let sx = (&plus + &minus).scaled(0.5);
    let sy = (&plus - &minus).map(|z| z * Complex64::new(0.0, -0.5));
    let sz = ComplexMatrix::from_fn(dim, dim, |r, col| if r == col { c(m(r)) } else { c(0.0) });
    [sx, sy, sz]
}

/// Embeds `op` acting on factor `slot` of a tensor product with the given
/// factor dimensions.
fn embed(op: &ComplexMatrix, slot: usize, dims: &[usize]) -> ComplexMatrix {
    dims.iter().enumerate().fold(ComplexMatrix::identity(1), |acc, (k, &d)| {
        if k == slot {
            acc.kron(op)
        } else {
            acc.kron(&ComplexMatrix::identity(d))
        }
    })
}

fn add_scaled(h: &mut ComplexMatrix, op: &ComplexMatrix, a: f64) {
    if a == 0.0 {
        return;
    }
    for (x, y) in h.as_mut_slice().iter_mut().zip(op.as_slice()) {
        *x += y * a;
    }
}

/// Static spin Hamiltonian in rad/s,
///
/// ```text
/// H = D S_z² + γ_e B·S + S·A_N·I_N [+ S·A_C·I_C] [− γ_N B·I_N − γ_C B·I_C] [+ P (I_z² − 2/3)]
/// ```
///
/// in the product basis electron ⊗ ¹⁴N [⊗ ¹³C], each factor ordered by
/// decreasing magnetic quantum number (`m_s = +1, 0, −1` first).
pub fn build_hamiltonian(system: &SpinSystem) -> Result<ComplexMatrix> {
    system.validate()?;
    let mut dims = vec![3, 3];
    if system.carbon.is_some() {
        dims.push(2);
    }
    let n: usize = dims.iter().product();
    let electron = spin_operators(2).map(|op| embed(&op, 0, &dims));
    let nitrogen = spin_operators(2).map(|op| embed(&op, 1, &dims));
    let carbon = system.carbon.as_ref().map(|_| spin_operators(1).map(|op| embed(&op, 2, &dims)));

    let mut h = ComplexMatrix::zeros(n, n);
    let sz2 = electron[2].matmul(&electron[2])?;
    add_scaled(&mut h, &sz2, system.zero_field_splitting);
    let ge = electron_gamma(system.g_factor);
    for a in 0..3 {
        add_scaled(&mut h, &electron[a], ge * system.field_gauss[a]);
    }
    for a in 0..3 {
        for b in 0..3 {
            let sa_ib = electron[a].matmul(&nitrogen[b])?;
            add_scaled(&mut h, &sa_ib, system.nitrogen_hyperfine[a][b]);
        }
    }
    if let (Some(site), Some(ops)) = (&system.carbon, &carbon) {
        for a in 0..3 {
            for b in 0..3 {
                let sa_jb = electron[a].matmul(&ops[b])?;
                add_scaled(&mut h, &sa_jb, site.hyperfine[a][b]);
            }
        }
    }
    if system.nuclear_zeeman {
        for a in 0..3 {
            let b_tesla = system.field_gauss[a] * GAUSS;
            add_scaled(&mut h, &nitrogen[a], -TAU * GAMMA_14N * b_tesla);
            if let Some(ops) = &carbon {
                add_scaled(&mut h, &ops[a], -TAU * GAMMA_13C * b_tesla);
            }
        }
    }
    if let Some(p) = system.nitrogen_quadrupole {
        let iz2 = nitrogen[2].matmul(&nitrogen[2])?;
        add_scaled(&mut h, &iz2, p);
        add_scaled(&mut h, &ComplexMatrix::identity(n), -2.0 * p / 3.0);
    }
    // Symmetrise away rounding in the imaginary parts of S_y products.
    Ok((&h + &h.adjoint()).scaled(0.5))
}

/// Nuclear Hamiltonians of the `m_s = 0` (α) and `m_s = −1` (β) manifolds,
/// rad/s, each with its trace removed.
///
/// Removing the traces takes out the electron transition carrier, leaving
/// only nuclear-scale frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldHamiltonians {
    pub alpha: ComplexMatrix,
    pub beta: ComplexMatrix,
}

/// Weight above which an eigenstate is attributed to one electron manifold.
const ASSIGNMENT_MIN_WEIGHT: f64 = 0.5;
/// Relative size of the off-block remainder tolerated after the rotation.
const BLOCK_TOL: f64 = 1e-9;

/// Exact block diagonalisation of `H` by electron manifold.
///
/// Each eigenstate is assigned to the manifold holding most of its weight.
/// The unitary `T` closest to `Σ_m Q_m P_m` (with `P_m` the spectral
/// projector of the states assigned to `m` and `Q_m` the bare projector onto
/// `m`) maps every dressed manifold onto its bare counterpart, so `T H Tᴴ`
/// is block diagonal with the same spectrum as `H`.
pub fn manifold_hamiltonians(system: &SpinSystem) -> Result<ManifoldHamiltonians> {
    let h = build_hamiltonian(system)?;
    let n = h.rows();
    let d = n / 3;
    let fail = || Error::ManifoldAssignment {
        field_gauss: system.field_magnitude(),
    };
    let (_, vecs) = hermitian_eigen(&h)?;

    let mut groups: [Vec<usize>; 3] = Default::default();
    for k in 0..n {
        let weights: Vec<f64> = (0..3)
            .map(|m| (m * d..(m + 1) * d).map(|r| vecs[(r, k)].norm_sqr()).sum())
            .collect();
        let (best, w) = weights
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (m, &w)| if w > acc.1 { (m, w) } else { acc });
        if w <= ASSIGNMENT_MIN_WEIGHT {
            return Err(fail());
        }
        groups[best].push(k);
    }
    if groups.iter().any(|g| g.len() != d) {
        return Err(fail());
    }

    // W = Σ_m Q_m P_m; row block m of W is row block m of P_m.
    let mut w = ComplexMatrix::zeros(n, n);
    for (m, group) in groups.iter().enumerate() {
        for r in m * d..(m + 1) * d {
            for col in 0..n {
                w[(r, col)] = group.iter().map(|&k| vecs[(r, k)] * vecs[(col, k)].conj()).sum();
            }
        }
    }
    let t = polar_unitary(&w)?;
    let rotated = t.matmul(&h)?.matmul(&t.adjoint())?;

    let scale = rotated.sum_squares().sqrt();
    let mut off = 0.0;
    for r in 0..n {
        for col in 0..n {
            if r / d != col / d {
                off += rotated[(r, col)].norm_sqr();
            }
        }
    }
    if off.sqrt() > BLOCK_TOL * scale {
        return Err(Error::Decomposition(format!(
            "manifold block diagonalisation left an off-block remainder of {:e}",
            off.sqrt() / scale
        )));
    }

    let block = |m: usize| {
        let b = ComplexMatrix::from_fn(d, d, |r, col| rotated[(m * d + r, m * d + col)]);
        let b = (&b + &b.adjoint()).scaled(0.5);
        let mean = (0..d).map(|k| b[(k, k)].re).sum::<f64>() / d as f64;
        &b - &ComplexMatrix::identity(d).scaled(mean)
    };
    Ok(ManifoldHamiltonians {
        alpha: block(1),
        beta: block(2),
    })
}

/// `1/√2`, the amplitude of an ideal π/2 rotation.
pub(crate) const HALF_SQRT2: f64 = SQRT_2 / 2.0;
