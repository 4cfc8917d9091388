//! Run configuration files.
//!
//! A configuration is a TOML document. Every key is optional and unknown
//! keys are rejected. Couplings are given in MHz and dwell times in ns.
//!
//! ```toml
//! name = "my-run"            # label for reports
//! preset = "onaxis-13C"      # start from a built-in experiment
//! signal_scale = 50.0
//!
//! [system]                   # spin Hamiltonian (replaces [synthetic])
//! zero_field_splitting_mhz = 2870.0
//! g_factor = 2.003
//! field_gauss = [0.0, 0.0, 450.0]
//! # or: field_magnitude_gauss = 100.9, field_angle_deg = 34.1
//! nitrogen_hyperfine_mhz = [[-2.7, 0, 0], [0, -2.7, 0], [0, 0, -2.14]]
//! carbon_hyperfine_mhz = [[3.985, 0, 3.0], [0, 2.485, 0], [3.0, 0, 8.485]]
//! nuclear_zeeman = true
//! nitrogen_quadrupole_mhz = -4.95
//!
//! [synthetic]                # separable cosine products
//! peaks = [{ nu1_mhz = 1.0, nu2_mhz = 2.0, amplitude = 1.0, phase = 0.0 }]
//!
//! [grid]
//! n1 = 201
//! n2 = 201
//! dt1_ns = 40.0
//! dt2_ns = 40.0
//! t1_start_ns = 0.0
//! t2_start_ns = 0.0
//!
//! [svt]
//! tau = 100.0
//! delta = 1.2
//! epsilon = 1e-4
//! max_iterations = 5000
//! init = "kick-start"        # or "zero"
//! svd = "auto"               # or "dense"
//! allow_large_step = false
//!
//! [sweep]
//! fractions = [0.1, 0.2, 0.4]
//! taus = [10.0, 100.0, 1000.0]
//! repeats = 128
//! base_seed = 0
//! noise_sigma = 0.0          # in units of the data RMS
//! domain = "frequency"       # or "time"
//! ```
//!
//! Without a preset the experiment needs a `[system]` or `[synthetic]`
//! section, the grid defaults to 201×201 points at 40 ns and the signal
//! scale to 1.

use std::ops::Range;
use std::path::Path;

use eseem_mc_core::analysis::{FidelityDomain, SweepConfig};
use eseem_mc_core::spin_sim::presets::{self, Experiment, Source};
use eseem_mc_core::spin_sim::{mhz, CarbonSite, EseemGrid, SpinSystem, SyntheticPeak};
use eseem_mc_core::svt::{SvdStrategy, SvtInit, SvtParams};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

type Tensor = [[f64; 3]; 3];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: Option<String>,
    pub preset: Option<Spanned<String>>,
    pub signal_scale: Option<Spanned<f64>>,
    pub system: Option<Spanned<SystemSection>>,
    pub synthetic: Option<Spanned<SyntheticSection>>,
    pub grid: Option<Spanned<GridSection>>,
    pub svt: Option<Spanned<SvtSection>>,
    pub sweep: Option<Spanned<SweepSection>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub zero_field_splitting_mhz: Option<f64>,
    pub g_factor: Option<f64>,
    pub field_gauss: Option<[f64; 3]>,
    pub field_magnitude_gauss: Option<f64>,
    /// Polar angle from the NV axis, field in the xz plane.
    pub field_angle_deg: Option<f64>,
    pub nitrogen_hyperfine_mhz: Option<Tensor>,
    pub carbon_hyperfine_mhz: Option<Tensor>,
    pub nuclear_zeeman: Option<bool>,
    pub nitrogen_quadrupole_mhz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub peaks: Vec<PeakEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakEntry {
    pub nu1_mhz: f64,
    pub nu2_mhz: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub dt1_ns: Option<f64>,
    pub dt2_ns: Option<f64>,
    pub t1_start_ns: Option<f64>,
    pub t2_start_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitName {
    KickStart,
    Zero,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvdName {
    Auto,
    Dense,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvtSection {
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
    pub init: Option<InitName>,
    pub svd: Option<SvdName>,
    pub allow_large_step: Option<bool>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    Time,
    Frequency,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub fractions: Option<Vec<f64>>,
    pub taus: Option<Vec<f64>>,
    pub repeats: Option<usize>,
    pub base_seed: Option<u64>,
    pub noise_sigma: Option<f64>,
    pub domain: Option<DomainName>,
}

fn ns(v: f64) -> f64 {
    v / 1e9
}

fn tensor_mhz(t: &Tensor) -> Tensor {
    t.map(|row| row.map(mhz))
}

/// A parsed configuration together with its source, for diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub origin: String,
    pub text: String,
    pub config: RunConfig,
}

impl LoadedConfig {
    pub fn parse(origin: impl Into<String>, text: impl Into<String>) -> CliResult<Self> {
        let (origin, text) = (origin.into(), text.into());
        let config: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config {
            path: origin.clone(),
            message: e.to_string(),
        })?;
        let loaded = Self { origin, text, config };
        // Surface every semantic error at load time.
        if loaded.config.preset.is_some() || loaded.config.system.is_some() || loaded.config.synthetic.is_some() {
            loaded.experiment()?;
        }
        loaded.svt_params()?;
        loaded.sweep_config()?;
        Ok(loaded)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path.display().to_string(), text)
    }

    fn line_of(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn error<T>(&self, spanned: &Spanned<T>, message: impl std::fmt::Display) -> CliError {
        CliError::Config {
            path: format!("{}:{}", self.origin, self.line_of(spanned.span())),
            message: message.to_string(),
        }
    }

    fn unanchored(&self, message: impl std::fmt::Display) -> CliError {
        CliError::Config {
            path: self.origin.clone(),
            message: message.to_string(),
        }
    }

    /// The experiment described by the preset and the model sections.
    pub fn experiment(&self) -> CliResult<Experiment> {
        let c = &self.config;
        let mut experiment = match &c.preset {
            Some(name) => presets::by_name(name.get_ref()).ok_or_else(|| {
                self.error(
                    name,
                    format!("unknown preset `{}` (known: {})", name.get_ref(), presets::PRESET_NAMES.join(", ")),
                )
            })?,
            None => {
                let source = match (&c.system, &c.synthetic) {
                    (Some(_), None) => Source::Spin(SpinSystem::default()),
                    (None, Some(_)) => Source::Synthetic(Vec::new()),
                    (Some(s), Some(_)) => return Err(self.error(s, "[system] and [synthetic] are mutually exclusive")),
                    (None, None) => {
                        return Err(self.unanchored("no experiment: set `preset` or add a [system] or [synthetic] section"))
                    }
                };
                Experiment {
                    name: "custom".into(),
                    source,
                    grid: EseemGrid::square(201, 40e-9),
                    signal_scale: 1.0,
                }
            }
        };

        if let Some(section) = &c.system {
            let Source::Spin(system) = &mut experiment.source else {
                return Err(self.error(section, "[system] cannot modify a synthetic preset"));
            };
            self.apply_system(section, system)?;
        }
        if let Some(section) = &c.synthetic {
            if matches!(experiment.source, Source::Spin(_)) {
                return Err(self.error(section, "[synthetic] cannot modify a spin preset"));
            }
            let peaks = section
                .get_ref()
                .peaks
                .iter()
                .map(|p| SyntheticPeak {
                    nu1: p.nu1_mhz * 1e6,
                    nu2: p.nu2_mhz * 1e6,
                    amplitude: p.amplitude,
                    phase: p.phase,
                })
                .collect();
            experiment.source = Source::Synthetic(peaks);
        }
        if let Some(section) = &c.grid {
            let g = section.get_ref();
            let grid = &mut experiment.grid;
            grid.n1 = g.n1.unwrap_or(grid.n1);
            grid.n2 = g.n2.unwrap_or(grid.n2);
            grid.dt1 = g.dt1_ns.map(ns).unwrap_or(grid.dt1);
            grid.dt2 = g.dt2_ns.map(ns).unwrap_or(grid.dt2);
            grid.t1_start = g.t1_start_ns.map(ns).unwrap_or(grid.t1_start);
            grid.t2_start = g.t2_start_ns.map(ns).unwrap_or(grid.t2_start);
            grid.validate().map_err(|e| self.error(section, e))?;
        }
        if let Some(name) = &c.name {
            experiment.name = name.clone();
        }
        if let Some(scale) = &c.signal_scale {
            let s = *scale.get_ref();
            if !(s > 0.0 && s.is_finite()) {
                return Err(self.error(scale, format!("signal_scale must be positive and finite, got {s}")));
            }
            experiment.signal_scale = s;
        }
        Ok(experiment)
    }

    fn apply_system(&self, section: &Spanned<SystemSection>, system: &mut SpinSystem) -> CliResult<()> {
        let s = section.get_ref();
        if let Some(d) = s.zero_field_splitting_mhz {
            system.zero_field_splitting = mhz(d);
        }
        if let Some(g) = s.g_factor {
            system.g_factor = g;
        }
        match (s.field_gauss, s.field_magnitude_gauss, s.field_angle_deg) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(self.error(section, "give either field_gauss or field_magnitude_gauss/field_angle_deg"))
            }
            (Some(b), None, None) => system.field_gauss = b,
            (None, Some(b), angle) => system.field_gauss = SpinSystem::tilted_field(b, angle.unwrap_or(0.0)),
            (None, None, Some(_)) => return Err(self.error(section, "field_angle_deg needs field_magnitude_gauss")),
            (None, None, None) => {}
        }
        if let Some(t) = &s.nitrogen_hyperfine_mhz {
            system.nitrogen_hyperfine = tensor_mhz(t);
        }
        if let Some(t) = &s.carbon_hyperfine_mhz {
            system.carbon = Some(CarbonSite {
                hyperfine: tensor_mhz(t),
            });
        }
        if let Some(z) = s.nuclear_zeeman {
            system.nuclear_zeeman = z;
        }
        if let Some(p) = s.nitrogen_quadrupole_mhz {
            system.nitrogen_quadrupole = Some(mhz(p));
        }
        system.validate().map_err(|e| self.error(section, e))
    }

    pub fn svt_params(&self) -> CliResult<SvtParams> {
        let mut p = SvtParams::default();
        let Some(section) = &self.config.svt else {
            return Ok(p);
        };
        let s = section.get_ref();
        p.tau = s.tau.unwrap_or(p.tau);
        p.delta = s.delta.unwrap_or(p.delta);
        p.epsilon = s.epsilon.unwrap_or(p.epsilon);
        p.max_iterations = s.max_iterations.unwrap_or(p.max_iterations);
        p.allow_large_step = s.allow_large_step.unwrap_or(p.allow_large_step);
        if let Some(init) = s.init {
            p.init = match init {
                InitName::KickStart => SvtInit::KickStart,
                InitName::Zero => SvtInit::Zero,
            };
        }
        if let Some(svd) = s.svd {
            p.svd = match svd {
                SvdName::Auto => SvdStrategy::Auto,
                SvdName::Dense => SvdStrategy::Dense,
            };
        }
        p.validate().map_err(|e| self.error(section, e))?;
        Ok(p)
    }

    pub fn sweep_config(&self) -> CliResult<SweepConfig> {
        let mut c = SweepConfig::default();
        let Some(section) = &self.config.sweep else {
            return Ok(c);
        };
        let s = section.get_ref();
        if let Some(f) = &s.fractions {
            c.fractions = f.clone();
        }
        if let Some(t) = &s.taus {
            c.taus = t.clone();
        }
        c.repeats = s.repeats.unwrap_or(c.repeats);
        c.base_seed = s.base_seed.unwrap_or(c.base_seed);
        c.noise_sigma = s.noise_sigma.unwrap_or(c.noise_sigma);
        if let Some(d) = s.domain {
            c.domain = match d {
                DomainName::Time => FidelityDomain::Time,
                DomainName::Frequency => FidelityDomain::Frequency,
            };
        }
        c.validate().map_err(|e| self.error(section, e))?;
        Ok(c)
    }
}
