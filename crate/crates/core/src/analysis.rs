//! Reconstruction quality and the sampling-fraction and threshold sweeps.
//!
//! Fidelity is `F = 1 − ‖M_tot − M_red‖_F² / ‖M_tot‖_F²`. It is evaluated
//! both on the time-domain matrices and on the magnitudes of their 2D DFTs;
//! the frequency-domain value is the headline number.
//!
//! Every repeat is seeded independently of scheduling. Repeat `r` of the
//! fraction with index `f` uses the mask seed `derive_seed(base_seed, f, r)`
//! and, when noise is requested, the noise stream
//! `stream_seed(mask_seed, NOISE_STREAM)`. The seed does not depend on τ, so
//! a threshold sweep compares every τ on the same set of masks.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{singular_values, RealMatrix};
use crate::rng::{derive_seed, stream_seed, SeededRng, NOISE_STREAM};
use crate::sampling::{generate_uniform_mask, project};
use crate::spectral::centred_transform;
use crate::svt::{svt_complete, SvtParams};

/// `1 − ‖M_tot − M_red‖_F² / ‖M_tot‖_F²`, unclamped.
pub fn fidelity(m_tot: &RealMatrix, m_red: &RealMatrix) -> Result<f64> {
    m_tot.ensure_finite()?;
    m_red.ensure_finite()?;
    m_red.ensure_shape(m_tot.shape())?;
    let reference = m_tot.sum_squares();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(1.0 - (m_tot - m_red).sum_squares() / reference)
}

/// Magnitude of the centred 2D DFT.
pub fn dft_magnitude(m: &RealMatrix) -> Result<RealMatrix> {
    Ok(centred_transform(m, 1)?.map(|z| z.norm()))
}

/// [`fidelity`] between the DFT magnitudes of the two matrices.
pub fn fidelity_frequency(m_tot: &RealMatrix, m_red: &RealMatrix) -> Result<f64> {
    m_red.ensure_shape(m_tot.shape())?;
    fidelity(&dft_magnitude(m_tot)?, &dft_magnitude(m_red)?)
}

/// Singular values in descending order.
pub fn singular_spectrum(m: &RealMatrix) -> Result<Vec<f64>> {
    singular_values(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityDomain {
    Time,
    #[default]
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub fractions: Vec<f64>,
    pub taus: Vec<f64>,
    pub repeats: usize,
    pub base_seed: u64,
    /// Standard deviation of the additive noise in units of the RMS of the
    /// reference matrix.
    pub noise_sigma: f64,
    /// Domain of the headline mean and standard deviation.
    pub domain: FidelityDomain,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fractions: vec![0.1],
            taus: vec![100.0],
            repeats: 128,
            base_seed: 0,
            noise_sigma: 0.0,
            domain: FidelityDomain::Frequency,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(invalid("fractions", "must not be empty"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(invalid("fractions", format!("{f} is outside (0, 1]")));
        }
        if self.taus.is_empty() {
            return Err(invalid("taus", "must not be empty"));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(invalid("taus", format!("{t} is not a positive finite threshold")));
        }
        if self.repeats == 0 {
            return Err(invalid("repeats", "must be at least 1"));
        }
        if self.fractions.len() > u32::MAX as usize || self.repeats > u32::MAX as usize {
            return Err(invalid("repeats", "too many cells for the seed derivation"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma", format!("must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// One solve of a sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatOutcome {
    pub repeat: usize,
    pub seed: u64,
    /// NaN when the repeat failed.
    pub fidelity_time: f64,
    pub fidelity_freq: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Why the solve aborted, if it did.
    pub failure: Option<String>,
}

impl RepeatOutcome {
    pub fn fidelity(&self, domain: FidelityDomain) -> f64 {
        match domain {
            FidelityDomain::Time => self.fidelity_time,
            FidelityDomain::Frequency => self.fidelity_freq,
        }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Aggregate over the repeats of one `(fraction, τ)` cell. Means and
/// population standard deviations skip failed repeats and are NaN if all
/// failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub fraction: f64,
    pub tau: f64,
    pub outcomes: Vec<RepeatOutcome>,
    /// Statistics in the configured domain.
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub mean_fidelity_time: f64,
    pub std_fidelity_time: f64,
    pub mean_fidelity_freq: f64,
    pub std_fidelity_freq: f64,
    pub mean_iterations: f64,
    pub converged_count: usize,
    pub failed_count: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    // Shifted by the first value so that identical repeats give exactly
    // that value and a spread of exactly zero.
    let n = values.len() as f64;
    let shift = values[0];
    let offset = values.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - shift - offset).powi(2)).sum::<f64>() / n;
    (shift + offset, var.sqrt())
}

impl SweepRecord {
    fn from_outcomes(fraction: f64, tau: f64, outcomes: Vec<RepeatOutcome>, domain: FidelityDomain) -> Self {
        let ok: Vec<&RepeatOutcome> = outcomes.iter().filter(|o| !o.failed()).collect();
        let column = |f: fn(&RepeatOutcome) -> f64| ok.iter().map(|o| f(o)).collect::<Vec<_>>();
        let (mean_fidelity_time, std_fidelity_time) = mean_std(&column(|o| o.fidelity_time));
        let (mean_fidelity_freq, std_fidelity_freq) = mean_std(&column(|o| o.fidelity_freq));
        let (mean_fidelity, std_fidelity) = match domain {
            FidelityDomain::Time => (mean_fidelity_time, std_fidelity_time),
            FidelityDomain::Frequency => (mean_fidelity_freq, std_fidelity_freq),
        };
        Self {
            fraction,
            tau,
            mean_fidelity,
            std_fidelity,
            mean_fidelity_time,
            std_fidelity_time,
            mean_fidelity_freq,
            std_fidelity_freq,
            mean_iterations: mean_std(&column(|o| o.iterations as f64)).0,
            converged_count: ok.iter().filter(|o| o.converged).count(),
            failed_count: outcomes.len() - ok.len(),
            outcomes,
        }
    }

    /// Fidelities of the successful repeats in `domain`.
    pub fn fidelities(&self, domain: FidelityDomain) -> Vec<f64> {
        self.outcomes.iter().filter(|o| !o.failed()).map(|o| o.fidelity(domain)).collect()
    }
}

struct Reference<'a> {
    m: &'a RealMatrix,
    magnitude: RealMatrix,
    noise_scale: f64,
}

fn run_repeat(reference: &Reference, fraction: f64, cell: usize, repeat: usize, base_seed: u64, params: &SvtParams) -> RepeatOutcome {
    let seed = derive_seed(base_seed, cell as u32, repeat as u32);
    let failed = |failure: Error| RepeatOutcome {
        repeat,
        seed,
        fidelity_time: f64::NAN,
        fidelity_freq: f64::NAN,
        iterations: match failure {
            Error::Diverged { iteration, .. } | Error::NonFiniteIterate { iteration } => iteration,
            _ => 0,
        },
        converged: false,
        failure: Some(failure.to_string()),
    };
    let solve = || -> Result<RepeatOutcome> {
        let (rows, cols) = reference.m.shape();
        let mask = generate_uniform_mask(rows, cols, fraction, seed)?;
        let mut observed = project(reference.m, &mask)?;
        if reference.noise_scale > 0.0 {
            let mut rng = SeededRng::new(stream_seed(seed, NOISE_STREAM));
            for &(i, j) in mask.indices() {
                observed[(i, j)] += reference.noise_scale * rng.next_gaussian();
            }
        }
        let result = svt_complete(&observed, &mask, params)?;
        let reference_mag = &reference.magnitude;
        Ok(RepeatOutcome {
            repeat,
            seed,
            fidelity_time: fidelity(reference.m, &result.completed)?,
            fidelity_freq: fidelity(reference_mag, &dft_magnitude(&result.completed)?)?,
            iterations: result.iterations,
            converged: result.converged,
            failure: None,
        })
    };
    solve().unwrap_or_else(failed)
}

/// Runs `cells` (fraction index, τ) with `repeats` each, in parallel, and
/// returns records in the order of `cells`.
fn run_cells(m_tot: &RealMatrix, config: &SweepConfig, params: &SvtParams, cells: &[(usize, f64)]) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    for &(_, tau) in cells {
        params.clone().with_tau(tau).validate()?;
    }
    m_tot.ensure_finite()?;
    if m_tot.sum_squares() == 0.0 {
        return Err(Error::ZeroReference);
    }
    let reference = Reference {
        m: m_tot,
        magnitude: dft_magnitude(m_tot)?,
        noise_scale: config.noise_sigma * m_tot.rms(),
    };
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.repeats).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<RepeatOutcome> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (f, tau) = cells[c];
            let p = params.clone().with_tau(tau);
            run_repeat(&reference, config.fractions[f], f, r, config.base_seed, &p)
        })
        .collect();
    let mut outcomes = outcomes.into_iter();
    Ok(cells
        .iter()
        .map(|&(f, tau)| {
            let cell: Vec<RepeatOutcome> = outcomes.by_ref().take(config.repeats).collect();
            SweepRecord::from_outcomes(config.fractions[f], tau, cell, config.domain)
        })
        .collect())
}

/// One record per entry of `config.fractions`, solved with `params`
/// (`config.taus` is not used).
pub fn sweep_sampling_fraction(m_tot: &RealMatrix, config: &SweepConfig, params: &SvtParams) -> Result<Vec<SweepRecord>> {
    let cells: Vec<(usize, f64)> = (0..config.fractions.len()).map(|f| (f, params.tau)).collect();
    run_cells(m_tot, config, params, &cells)
}

/// One record per `(τ, fraction)` pair, τ-major, with the remaining solver
/// settings taken from `params_base`.
pub fn sweep_tau(m_tot: &RealMatrix, config: &SweepConfig, params_base: &SvtParams) -> Result<Vec<SweepRecord>> {
    let cells: Vec<(usize, f64)> = config
        .taus
        .iter()
        .flat_map(|&tau| (0..config.fractions.len()).map(move |f| (f, tau)))
        .collect();
    run_cells(m_tot, config, params_base, &cells)
}
