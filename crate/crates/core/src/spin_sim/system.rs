use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};

/// `2π · f` for `f` in MHz, giving rad/s.
pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

/// Hyperfine coupling to a single ¹³C nuclear spin (I = 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct CarbonSite {
    /// Hyperfine tensor, rad/s.
    pub hyperfine: [[f64; 3]; 3],
}

/// NV electron spin (S = 1) with its ¹⁴N nucleus (I = 1) and an optional
/// ¹³C. All couplings are angular frequencies; the field is in gauss and the
/// z axis is the NV axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    /// Zero-field splitting D, rad/s.
    pub zero_field_splitting: f64,
    pub g_factor: f64,
    /// Static field (Bx, By, Bz), gauss.
    pub field_gauss: [f64; 3],
    /// Hyperfine tensor to ¹⁴N, rad/s.
    pub nitrogen_hyperfine: [[f64; 3]; 3],
    pub carbon: Option<CarbonSite>,
    /// Include `−γ_n B·I` for every nucleus.
    pub nuclear_zeeman: bool,
    /// ¹⁴N quadrupole coupling P (`P (I_z² − 2/3)`), rad/s.
    pub nitrogen_quadrupole: Option<f64>,
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self {
            zero_field_splitting: mhz(2870.0),
            g_factor: 2.003,
            field_gauss: [0.0; 3],
            nitrogen_hyperfine: [[0.0; 3]; 3],
            carbon: None,
            nuclear_zeeman: false,
            nitrogen_quadrupole: None,
        }
    }
}

/// Relative tolerance on hyperfine tensor symmetry.
const SYMMETRY_TOL: f64 = 1e-12;

fn check_tensor(name: &'static str, a: &[[f64; 3]; 3]) -> Result<()> {
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(name, "tensor has non-finite components"));
    }
    let scale = a.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut asymmetry = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            asymmetry = asymmetry.max((a[i][j] - a[j][i]).abs());
        }
    }
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::AsymmetricTensor { name, asymmetry });
    }
    Ok(())
}

impl SpinSystem {
    pub fn validate(&self) -> Result<()> {
        if !(self.zero_field_splitting > 0.0 && self.zero_field_splitting.is_finite()) {
            return Err(invalid("zero_field_splitting", "must be positive and finite"));
        }
        if !(self.g_factor > 0.0 && self.g_factor.is_finite()) {
            return Err(invalid("g_factor", "must be positive and finite"));
        }
        if self.field_gauss.iter().any(|b| !b.is_finite()) {
            return Err(invalid("field_gauss", "field components must be finite"));
        }
        check_tensor("nitrogen_hyperfine", &self.nitrogen_hyperfine)?;
        if let Some(c) = &self.carbon {
            check_tensor("carbon_hyperfine", &c.hyperfine)?;
        }
        if let Some(p) = self.nitrogen_quadrupole {
            if !p.is_finite() {
                return Err(invalid("nitrogen_quadrupole", "must be finite"));
            }
        }
        Ok(())
    }

    /// Nuclear Hilbert-space dimension: 3, or 6 with a ¹³C.
    pub fn nuclear_dim(&self) -> usize {
        if self.carbon.is_some() {
            6
        } else {
            3
        }
    }

    pub fn field_magnitude(&self) -> f64 {
        self.field_gauss.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    /// Field of magnitude `gauss` tilted by `degrees` from z towards x.
    pub fn tilted_field(gauss: f64, degrees: f64) -> [f64; 3] {
        let t = degrees.to_radians();
        [gauss * t.sin(), 0.0, gauss * t.cos()]
    }
}

/// Sampling grid of the two inter-pulse delays.
///
/// `τ1(i) = t1_start + i·dt1` and `τ2(j) = t2_start + j·dt2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EseemGrid {
    pub n1: usize,
    pub n2: usize,
    /// Dwell times, seconds.
    pub dt1: f64,
    pub dt2: f64,
    /// Initial delays, seconds.
    pub t1_start: f64,
    pub t2_start: f64,
}

impl EseemGrid {
    /// `n×n` grid with equal dwell times starting at zero delay.
    pub fn square(n: usize, dt: f64) -> Self {
        Self {
            n1: n,
            n2: n,
            dt1: dt,
            dt2: dt,
            t1_start: 0.0,
            t2_start: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 {
            return Err(invalid("grid", format!("need at least 2 points per axis, got {}x{}", self.n1, self.n2)));
        }
        for (name, dt) in [("dt1", self.dt1), ("dt2", self.dt2)] {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(name, format!("dwell time must be positive, got {dt}")));
            }
        }
        for (name, t) in [("t1_start", self.t1_start), ("t2_start", self.t2_start)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid(name, format!("initial delay must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn tau1(&self, i: usize) -> f64 {
        self.t1_start + i as f64 * self.dt1
    }

    pub fn tau2(&self, j: usize) -> f64 {
        self.t2_start + j as f64 * self.dt2
    }

    /// Nyquist frequencies `1/(2·dt)` of the two axes, Hz.
    pub fn nyquist(&self) -> (f64, f64) {
        (0.5 / self.dt1, 0.5 / self.dt2)
    }
}
