use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use eseem_mc_core::analysis::{
    fidelity, fidelity_frequency, singular_spectrum, sweep_sampling_fraction, sweep_tau, SweepConfig, SweepRecord,
};
use eseem_mc_core::sampling::{generate_uniform_mask, project};
use eseem_mc_core::spectral::{dft2_zero_filled, find_peaks};
use eseem_mc_core::spin_sim::presets::{self, Experiment};
use eseem_mc_core::spin_sim::EseemGrid;
use eseem_mc_core::svt::{svt_complete, SvtParams, SvtResult};
use eseem_mc_core::RealMatrix;
use serde::Serialize;
use toml::Spanned;

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};
use crate::io::{read_mask, read_matrix, write_mask, write_matrix};

/// Where the experiment definition comes from.
#[derive(Debug, Clone, Default)]
pub struct ExperimentSource {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
}

impl ExperimentSource {
    fn load_config(&self) -> CliResult<Option<LoadedConfig>> {
        self.config.as_deref().map(LoadedConfig::load).transpose()
    }

    /// The experiment named by `--preset`, or the one in the config file.
    pub fn experiment(&self) -> CliResult<Experiment> {
        match (&self.preset, self.load_config()?) {
            (Some(name), Some(mut c)) => {
                if c.config.preset.is_some() {
                    return Err(CliError::InvalidArgument(
                        "--preset conflicts with the `preset` key in the config".into(),
                    ));
                }
                c.config.preset = Some(Spanned::new(0..0, name.clone()));
                c.experiment()
            }
            (Some(name), None) => presets::by_name(name).ok_or_else(|| {
                CliError::InvalidArgument(format!(
                    "unknown preset `{name}` (known: {})",
                    presets::PRESET_NAMES.join(", ")
                ))
            }),
            (None, Some(c)) => c.experiment(),
            (None, None) => Err(CliError::InvalidArgument("either --preset or --config is required".into())),
        }
    }
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

/// Grid description printed after a simulation.
pub fn describe_grid(grid: &EseemGrid) -> String {
    let (ny1, ny2) = grid.nyquist();
    format!(
        "grid: n1 = {}, n2 = {}, dt1 = {:e} s, dt2 = {:e} s, t1_start = {:e} s, t2_start = {:e} s, nyquist = ({:.4}, {:.4}) MHz",
        grid.n1,
        grid.n2,
        grid.dt1,
        grid.dt2,
        grid.t1_start,
        grid.t2_start,
        ny1 / 1e6,
        ny2 / 1e6
    )
}

/// Simulates an experiment and writes its time-domain matrix. Returns the
/// lines to report.
pub fn simulate(source: &ExperimentSource, output: &Path) -> CliResult<Vec<String>> {
    let experiment = source.experiment()?;
    let out = experiment.simulate()?;
    write_matrix(output, &out.signal)?;
    let mut report = vec![
        format!("experiment: {}", experiment.name),
        describe_grid(&experiment.grid),
    ];
    report.extend(out.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(report)
}

/// Draws a uniform mask and writes it together with the projected matrix.
pub fn mask(input: &Path, fraction: f64, seed: u64, mask_out: &Path, output: &Path) -> CliResult<String> {
    let m: RealMatrix = read_matrix(input)?;
    let mask = generate_uniform_mask(m.rows(), m.cols(), fraction, seed)?;
    write_mask(mask_out, &mask)?;
    write_matrix(output, &project(&m, &mask)?)?;
    Ok(format!(
        "sampled {} of {} entries ({:.4}), seed {seed}",
        mask.len(),
        m.rows() * m.cols(),
        mask.fraction()
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub final_rank: usize,
    pub tau: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub observed: usize,
}

impl CompletionReport {
    fn new(result: &SvtResult, params: &SvtParams, observed: usize) -> Self {
        Self {
            iterations: result.iterations,
            converged: result.converged,
            final_residual: result.final_residual,
            final_rank: result.final_rank,
            tau: params.tau,
            delta: params.delta,
            epsilon: params.epsilon,
            max_iterations: params.max_iterations,
            observed,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serialises")
    }
}

/// Completes a projected matrix. The report is also written to `report`
/// when given.
pub fn complete(
    input: &Path,
    mask_path: &Path,
    params: &SvtParams,
    output: &Path,
    report: Option<&Path>,
) -> CliResult<CompletionReport> {
    let observed: RealMatrix = read_matrix(input)?;
    let mask = read_mask(mask_path)?;
    let result = svt_complete(&observed, &mask, params)?;
    write_matrix(output, &result.completed)?;
    let summary = CompletionReport::new(&result, params, mask.len());
    if let Some(path) = report {
        create(path)?
            .write_all(summary.to_toml().as_bytes())
            .map_err(|e| CliError::io(path, e))?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
struct PeakRow {
    row: usize,
    col: usize,
    nu1_hz: f64,
    nu2_hz: f64,
    amplitude: f64,
}

/// Dwell times for the spectrum axes.
#[derive(Debug, Clone, Default)]
pub struct GridSource {
    pub experiment: ExperimentSource,
    pub dt1_ns: Option<f64>,
    pub dt2_ns: Option<f64>,
}

impl GridSource {
    fn grid(&self, rows: usize, cols: usize) -> CliResult<EseemGrid> {
        let (dt1, dt2) = match (self.dt1_ns, self.dt2_ns) {
            (Some(a), Some(b)) => {
                if self.experiment.preset.is_some() || self.experiment.config.is_some() {
                    return Err(CliError::InvalidArgument(
                        "give dwell times either explicitly or through --preset/--config".into(),
                    ));
                }
                (a / 1e9, b / 1e9)
            }
            (None, None) => {
                let g = self.experiment.experiment()?.grid;
                (g.dt1, g.dt2)
            }
            _ => return Err(CliError::InvalidArgument("--dt1-ns and --dt2-ns go together".into())),
        };
        let grid = EseemGrid {
            n1: rows,
            n2: cols,
            dt1,
            dt2,
            t1_start: 0.0,
            t2_start: 0.0,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Writes the centred 2D spectrum and its peak list. Returns the number of
/// peaks.
pub fn spectrum(
    input: &Path,
    grid: &GridSource,
    threshold: f64,
    zero_fill: usize,
    output: &Path,
    peaks_out: &Path,
) -> CliResult<usize> {
    let m: RealMatrix = read_matrix(input)?;
    let grid = grid.grid(m.rows(), m.cols())?;
    let spectrum = dft2_zero_filled(&m, &grid, zero_fill)?;
    let peaks = find_peaks(&spectrum, threshold)?;
    write_matrix(output, &spectrum.values)?;
    let mut w = csv_writer(peaks_out)?;
    for p in &peaks {
        w.serialize(PeakRow {
            row: p.row,
            col: p.col,
            nu1_hz: p.nu1,
            nu2_hz: p.nu2,
            amplitude: p.amplitude,
        })
        .map_err(|e| csv_error(peaks_out, e))?;
    }
    w.flush().map_err(|e| CliError::io(peaks_out, e))?;
    Ok(peaks.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub fidelity_time: f64,
    pub fidelity_freq: f64,
}

/// Fidelity of `input` against `reference`, optionally writing the singular
/// values of `input`.
pub fn analyze(reference: &Path, input: &Path, singular_values: Option<&Path>) -> CliResult<Comparison> {
    let m_tot: RealMatrix = read_matrix(reference)?;
    let m_red: RealMatrix = read_matrix(input)?;
    let out = Comparison {
        fidelity_time: fidelity(&m_tot, &m_red)?,
        fidelity_freq: fidelity_frequency(&m_tot, &m_red)?,
    };
    if let Some(path) = singular_values {
        let mut w = csv_writer(path)?;
        w.write_record(["index", "sigma"]).map_err(|e| csv_error(path, e))?;
        for (i, s) in singular_spectrum(&m_red)?.iter().enumerate() {
            w.write_record([i.to_string(), format!("{s:?}")]).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Fraction,
    Tau,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub experiment: ExperimentSource,
    /// Precomputed reference matrix; replaces the simulation.
    pub input: Option<PathBuf>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct RepeatRow {
    fraction: f64,
    tau: f64,
    repeat: usize,
    seed: u64,
    fidelity_time: f64,
    fidelity_freq: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRow {
    fraction: f64,
    tau: f64,
    repeats: usize,
    failed: usize,
    converged: usize,
    mean_fidelity: f64,
    std_fidelity: f64,
    mean_fidelity_time: f64,
    std_fidelity_time: f64,
    mean_fidelity_freq: f64,
    std_fidelity_freq: f64,
    mean_iterations: f64,
}

/// `<stem>_summary.csv` next to `output`.
pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    output.with_file_name(format!("{stem}_summary.csv"))
}

/// Runs a fraction or threshold sweep and writes the per-repeat CSV and its
/// summary.
pub fn sweep(
    options: &SweepOptions,
    mode: SweepMode,
    output: &Path,
    summary: Option<&Path>,
) -> CliResult<Vec<SweepRecord>> {
    let loaded = options.experiment.load_config()?;
    let (params, mut config) = match &loaded {
        Some(c) => (c.svt_params()?, c.sweep_config()?),
        None => (SvtParams::default(), SweepConfig::default()),
    };
    config.repeats = options.repeats.unwrap_or(config.repeats);
    config.base_seed = options.seed.unwrap_or(config.base_seed);
    config.validate()?;

    let m_tot: RealMatrix = match &options.input {
        Some(path) => read_matrix(path)?,
        None => options.experiment.experiment()?.simulate()?.signal,
    };
    let run = || match mode {
        SweepMode::Fraction => sweep_sampling_fraction(&m_tot, &config, &params),
        SweepMode::Tau => sweep_tau(&m_tot, &config, &params),
    };
    let records = match options.jobs {
        Some(0) => return Err(CliError::InvalidArgument("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::InvalidArgument(format!("cannot start {n} worker threads: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut w = csv_writer(output)?;
    for r in &records {
        for o in &r.outcomes {
            w.serialize(RepeatRow {
                fraction: r.fraction,
                tau: r.tau,
                repeat: o.repeat,
                seed: o.seed,
                fidelity_time: o.fidelity_time,
                fidelity_freq: o.fidelity_freq,
                iterations: o.iterations,
                converged: o.converged,
            })
            .map_err(|e| csv_error(output, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(output, e))?;

    let summary = summary.map(Path::to_path_buf).unwrap_or_else(|| summary_path(output));
    let mut w = csv_writer(&summary)?;
    for r in &records {
        w.serialize(SummaryRow {
            fraction: r.fraction,
            tau: r.tau,
            repeats: r.outcomes.len(),
            failed: r.failed_count,
            converged: r.converged_count,
            mean_fidelity: r.mean_fidelity,
            std_fidelity: r.std_fidelity,
            mean_fidelity_time: r.mean_fidelity_time,
            std_fidelity_time: r.std_fidelity_time,
            mean_fidelity_freq: r.mean_fidelity_freq,
            std_fidelity_freq: r.std_fidelity_freq,
            mean_iterations: r.mean_iterations,
        })
        .map_err(|e| csv_error(&summary, e))?;
    }
    w.flush().map_err(|e| CliError::io(&summary, e))?;
    Ok(records)
}
