use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eseem_mc_cli::commands::{self, ExperimentSource, GridSource, SweepMode, SweepOptions};
use eseem_mc_cli::config::LoadedConfig;
use eseem_mc_cli::{CliError, CliResult};
use eseem_mc_core::svt::SvtParams;

/// Matrix completion of sparsely sampled 2D ESEEM data.
///
/// Exit codes: 0 success, 2 usage error, 3 invalid configuration or
/// parameter, 4 numerical failure, 5 I/O or malformed input file.
#[derive(Parser)]
#[command(name = "eseem-mc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in experiment: misaligned-14N, onaxis-13C or lowrank-synthetic.
    #[arg(long)]
    preset: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SourceArgs {
    fn source(&self) -> ExperimentSource {
        ExperimentSource {
            preset: self.preset.clone(),
            config: self.config.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fraction,
    Tau,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an experiment and write its time-domain matrix.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Draw a uniform random mask and project a matrix onto it.
    Mask {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        /// Mask file to write.
        #[arg(long)]
        mask_out: PathBuf,
        /// Projected matrix to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Complete a projected matrix with singular value thresholding.
    Complete {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// Solver settings from the [svt] section; flags override them.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the run report (TOML) here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// 2D DFT of a time-domain matrix plus its peak list.
    Spectrum {
        #[arg(short, long)]
        input: PathBuf,
        /// Dwell times come from the preset or config grid unless given.
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        dt1_ns: Option<f64>,
        #[arg(long)]
        dt2_ns: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        peaks_threshold: f64,
        #[arg(long, default_value_t = 1)]
        zero_fill: usize,
        /// Complex spectrum matrix to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Peak list CSV to write.
        #[arg(long)]
        peaks: PathBuf,
    },
    /// Fidelity of a reconstruction against the full data.
    Analyze {
        #[arg(long)]
        reference: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        /// Write the singular values of the input as CSV.
        #[arg(long)]
        singular_values: Option<PathBuf>,
    },
    /// Fidelity sweep over sampling fractions or thresholds.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        /// Use this matrix as the full data instead of simulating.
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Per-repeat CSV.
        #[arg(short, long)]
        output: PathBuf,
        /// Aggregated CSV; defaults to <output stem>_summary.csv.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { source, output } => {
            for line in commands::simulate(&source.source(), &output)? {
                println!("{line}");
            }
        }
        Command::Mask {
            input,
            fraction,
            seed,
            mask_out,
            output,
        } => println!("{}", commands::mask(&input, fraction, seed, &mask_out, &output)?),
        Command::Complete {
            input,
            mask,
            config,
            tau,
            delta,
            eps,
            max_iters,
            output,
            report,
        } => {
            let mut params = match config {
                Some(path) => LoadedConfig::load(&path)?.svt_params()?,
                None => SvtParams::default(),
            };
            params.tau = tau.unwrap_or(params.tau);
            params.delta = delta.unwrap_or(params.delta);
            params.epsilon = eps.unwrap_or(params.epsilon);
            params.max_iterations = max_iters.unwrap_or(params.max_iterations);
            params.validate()?;
            let summary = commands::complete(&input, &mask, &params, &output, report.as_deref())?;
            print!("{}", summary.to_toml());
            if !summary.converged {
                eprintln!("warning: stopped at the iteration cap before reaching the tolerance");
            }
        }
        Command::Spectrum {
            input,
            source,
            dt1_ns,
            dt2_ns,
            peaks_threshold,
            zero_fill,
            output,
            peaks,
        } => {
            let grid = GridSource {
                experiment: source.source(),
                dt1_ns,
                dt2_ns,
            };
            let n = commands::spectrum(&input, &grid, peaks_threshold, zero_fill, &output, &peaks)?;
            println!("{n} peaks above {peaks_threshold} of the maximum");
        }
        Command::Analyze {
            reference,
            input,
            singular_values,
        } => {
            let c = commands::analyze(&reference, &input, singular_values.as_deref())?;
            println!("fidelity_time = {:?}", c.fidelity_time);
            println!("fidelity_freq = {:?}", c.fidelity_freq);
        }
        Command::Sweep {
            source,
            input,
            mode,
            repeats,
            seed,
            jobs,
            output,
            summary,
        } => {
            let options = SweepOptions {
                experiment: source.source(),
                input,
                repeats,
                seed,
                jobs,
            };
            let mode = match mode {
                Mode::Fraction => SweepMode::Fraction,
                Mode::Tau => SweepMode::Tau,
            };
            for r in commands::sweep(&options, mode, &output, summary.as_deref())? {
                println!(
                    "fraction {:.3} tau {}: fidelity {:.4} ± {:.4}, {:.0} iterations, {}/{} converged, {} failed",
                    r.fraction,
                    r.tau,
                    r.mean_fidelity,
                    r.std_fidelity,
                    r.mean_iterations,
                    r.converged_count,
                    r.outcomes.len(),
                    r.failed_count
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
