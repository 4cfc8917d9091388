//! Built-in experiments.
//!
//! The hyperfine tensors are stand-ins chosen to give the qualitative peak
//! structure of the two NV measurements; they are not fitted to any data.

use super::echo::{eseem_signal, EseemSignal};
use super::synthetic::{synthetic_low_rank_signal, SyntheticPeak};
use super::system::{mhz, CarbonSite, EseemGrid, SpinSystem};
use crate::error::Result;

/// Where the time-domain data of an experiment comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Spin(SpinSystem),
    Synthetic(Vec<SyntheticPeak>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub source: Source,
    pub grid: EseemGrid,
    /// Multiplies the simulated signal (detector counts per unit population).
    pub signal_scale: f64,
}

impl Experiment {
    /// Scaled time-domain data.
    pub fn simulate(&self) -> Result<EseemSignal> {
        let mut out = match &self.source {
            Source::Spin(system) => eseem_signal(system, &self.grid)?,
            Source::Synthetic(peaks) => EseemSignal {
                signal: synthetic_low_rank_signal(peaks, &self.grid)?,
                warnings: Vec::new(),
            },
        };
        out.signal = out.signal.scaled(self.signal_scale);
        Ok(out)
    }
}

/// Detector units per unit of m_s = 0 population for the spin presets.
/// The solver threshold τ is absolute, so this fixes where τ = 100 sits
/// relative to the singular values of the data.
pub const SPIN_SIGNAL_SCALE: f64 = 50.0;

pub const PRESET_NAMES: [&str; 3] = ["misaligned-14N", "onaxis-13C", "lowrank-synthetic"];

/// Axial ¹⁴N hyperfine tensor of the NV ground state, rad/s.
pub fn nitrogen_tensor() -> [[f64; 3]; 3] {
    [[mhz(-2.70), 0.0, 0.0], [0.0, mhz(-2.70), 0.0], [0.0, 0.0, mhz(-2.14)]]
}

/// Axially symmetric ¹³C tensor `a·1 + t(3nnᵀ − 1)`, a = 4.985 MHz,
/// t = 2.5 MHz, with its axis in the xz plane at 26.57° from z (tan = 1/2).
/// The values give `|A·ẑ| = 9 MHz`.
pub fn carbon_tensor() -> [[f64; 3]; 3] {
    [
        [mhz(3.985), 0.0, mhz(3.0)],
        [0.0, mhz(2.485), 0.0],
        [mhz(3.0), 0.0, mhz(8.485)],
    ]
}

/// 100.9 G at 34.1° from the NV axis, ¹⁴N only.
pub fn misaligned_14n() -> Experiment {
    Experiment {
        name: "misaligned-14N".into(),
        source: Source::Spin(SpinSystem {
            field_gauss: SpinSystem::tilted_field(100.9, 34.1),
            nitrogen_hyperfine: nitrogen_tensor(),
            ..SpinSystem::default()
        }),
        grid: EseemGrid::square(201, 50e-9),
        signal_scale: SPIN_SIGNAL_SCALE,
    }
}

/// Field along the NV axis with one strongly coupled ¹³C.
pub fn onaxis_13c() -> Experiment {
    Experiment {
        name: "onaxis-13C".into(),
        source: Source::Spin(SpinSystem {
            field_gauss: [0.0, 0.0, 450.0],
            nitrogen_hyperfine: nitrogen_tensor(),
            carbon: Some(CarbonSite {
                hyperfine: carbon_tensor(),
            }),
            nuclear_zeeman: true,
            ..SpinSystem::default()
        }),
        grid: EseemGrid::square(201, 40e-9),
        signal_scale: SPIN_SIGNAL_SCALE,
    }
}

/// Four separable cosine products: an exact rank-4 matrix.
pub fn lowrank_synthetic() -> Experiment {
    let peak = |nu1_mhz: f64, nu2_mhz: f64, amplitude: f64| SyntheticPeak {
        nu1: nu1_mhz * 1e6,
        nu2: nu2_mhz * 1e6,
        amplitude,
        phase: 0.0,
    };
    Experiment {
        name: "lowrank-synthetic".into(),
        source: Source::Synthetic(vec![
            peak(1.0, 2.0, 1.0),
            peak(9.0, 0.5, 0.8),
            peak(3.3, 7.1, 0.6),
            peak(5.2, 4.4, 0.5),
        ]),
        grid: EseemGrid::square(201, 40e-9),
        signal_scale: 1.0,
    }
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Option<Experiment> {
    match name {
        "misaligned-14N" => Some(misaligned_14n()),
        "onaxis-13C" => Some(onaxis_13c()),
        "lowrank-synthetic" => Some(lowrank_synthetic()),
        _ => None,
    }
}
