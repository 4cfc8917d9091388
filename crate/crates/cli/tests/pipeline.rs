use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eseem_mc_cli::config::LoadedConfig;
use eseem_mc_cli::exit;
use eseem_mc_cli::io::{read_mask, read_matrix};
use eseem_mc_core::analysis::{fidelity, fidelity_frequency};
use eseem_mc_core::sampling::{generate_uniform_mask, project};
use eseem_mc_core::spectral::{dft2, find_peaks};
use eseem_mc_core::svt::{svt_complete, SvtParams};
use eseem_mc_core::{ComplexMatrix, RealMatrix};

const SMALL_SYNTHETIC: &str = r#"
preset = "lowrank-synthetic"

[grid]
n1 = 48
n2 = 40
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eseem-mc")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Files {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Files {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.path(name);
        std::fs::write(&path, text).unwrap();
        path
    }
}

#[test]
fn file_pipeline_matches_in_memory_pipeline() {
    let f = Files::new();
    let config = f.write("run.toml", SMALL_SYNTHETIC);
    let (full, mask, observed, completed, spectrum, peaks) = (
        f.path("full.mtx"),
        f.path("omega.msk"),
        f.path("observed.mtx"),
        f.path("completed.mtx"),
        f.path("spectrum.mtx"),
        f.path("peaks.csv"),
    );
    let report = f.path("report.toml");

    let stdout = ok(&["simulate", "--config", p(&config), "-o", p(&full)]);
    assert!(stdout.contains("n1 = 48, n2 = 40"), "{stdout}");
    ok(&["mask", "-i", p(&full), "--fraction", "0.5", "--seed", "11", "--mask-out", p(&mask), "-o", p(&observed)]);
    ok(&[
        "complete", "-i", p(&observed), "--mask", p(&mask), "--tau", "60", "--max-iters", "3000", "-o", p(&completed),
        "--report", p(&report),
    ]);
    ok(&[
        "spectrum", "-i", p(&completed), "--config", p(&config), "--peaks-threshold", "0.3", "-o", p(&spectrum),
        "--peaks", p(&peaks),
    ]);
    let analysis = ok(&["analyze", "--reference", p(&full), "-i", p(&completed)]);

    // The same steps in memory.
    let experiment = LoadedConfig::load(&config).unwrap().experiment().unwrap();
    let m = experiment.simulate().unwrap().signal;
    assert_eq!(read_matrix::<f64>(&full).unwrap(), m);
    let omega = generate_uniform_mask(48, 40, 0.5, 11).unwrap();
    assert_eq!(read_mask(&mask).unwrap(), omega);
    let projected = project(&m, &omega).unwrap();
    assert_eq!(read_matrix::<f64>(&observed).unwrap(), projected);
    let params = SvtParams {
        max_iterations: 3000,
        ..SvtParams::default().with_tau(60.0)
    };
    let result = svt_complete(&projected, &omega, &params).unwrap();
    let x: RealMatrix = read_matrix(&completed).unwrap();
    assert_eq!(x, result.completed);
    let s = dft2(&x, &experiment.grid).unwrap();
    assert_eq!(read_matrix::<num_complex::Complex64>(&spectrum).unwrap(), s.values.clone() as ComplexMatrix);

    let expected = find_peaks(&s, 0.3).unwrap();
    let mut rows = csv::Reader::from_path(&peaks).unwrap();
    let listed: Vec<(usize, usize)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(listed, expected.iter().map(|q| (q.row, q.col)).collect::<Vec<_>>());

    let report: toml::Table = std::fs::read_to_string(&report).unwrap().parse().unwrap();
    assert_eq!(report["iterations"].as_integer().unwrap() as usize, result.iterations);
    assert_eq!(report["final_rank"].as_integer().unwrap() as usize, result.final_rank);
    assert!(result.final_rank >= 4);

    let ft = fidelity(&m, &x).unwrap();
    let ff = fidelity_frequency(&m, &x).unwrap();
    assert!(analysis.contains(&format!("fidelity_time = {ft:?}")), "{analysis}");
    assert!(analysis.contains(&format!("fidelity_freq = {ff:?}")), "{analysis}");
}

#[test]
fn sweep_writes_per_repeat_and_summary_tables() {
    let f = Files::new();
    let config = f.write(
        "sweep.toml",
        &format!("{SMALL_SYNTHETIC}\n[svt]\ntau = 60\n\n[sweep]\nfractions = [0.4, 1.0]\ntaus = [30, 60]\nrepeats = 3\nbase_seed = 5\n"),
    );
    let out = f.path("tau.csv");
    ok(&["sweep", "--config", p(&config), "--mode", "tau", "--jobs", "2", "-o", p(&out)]);
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["fraction", "tau", "repeat", "seed", "fidelity_time", "fidelity_freq", "iterations", "converged"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert_eq!((&rows[0][0], &rows[0][1]), ("0.4", "30.0"));
    assert_eq!((&rows[3][0], &rows[3][1]), ("1.0", "30.0"));
    assert_eq!((&rows[6][0], &rows[6][1]), ("0.4", "60.0"));
    // Masks are shared across thresholds.
    assert_eq!(&rows[0][3], &rows[6][3]);

    let summary = f.path("tau_summary.csv");
    let mut s = csv::Reader::from_path(&summary).unwrap();
    let column = s.headers().unwrap().iter().position(|h| h == "std_fidelity_freq").unwrap();
    let cells: Vec<csv::StringRecord> = s.records().map(Result::unwrap).collect();
    assert_eq!(cells.len(), 4);
    // Every repeat at fraction 1 sees the whole matrix.
    assert_eq!(cells[1][column].parse::<f64>().unwrap(), 0.0);

    // A single worker gives the same table.
    let serial = f.path("serial.csv");
    ok(&["sweep", "--config", p(&config), "--mode", "tau", "--jobs", "1", "-o", p(&serial)]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&serial).unwrap());
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let f = Files::new();
    let typo = f.write("typo.toml", "preset = \"onaxis-13C\"\n[svt]\ntau = 100\ntua = 1\n");
    let out = run(&["simulate", "--config", p(&typo), "-o", p(&f.path("x.mtx"))]);
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    let out = run(&["mask", "-i", p(&f.path("missing.mtx")), "--fraction", "0.5", "--seed", "1", "--mask-out", "a", "-o", "b"]);
    assert_eq!(out.status.code(), Some(exit::IO));

    let bad = f.write("bad.mtx", "MTX 2 2 real\n1 2\n3\n");
    let out = run(&["analyze", "--reference", p(&bad), "-i", p(&bad)]);
    assert_eq!(out.status.code(), Some(exit::IO));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.mtx:3"));

    let config = f.write("run.toml", SMALL_SYNTHETIC);
    let (full, mask, observed) = (f.path("full.mtx"), f.path("m.msk"), f.path("obs.mtx"));
    ok(&["simulate", "--config", p(&config), "-o", p(&full)]);
    ok(&["mask", "-i", p(&full), "--fraction", "0.5", "--seed", "3", "--mask-out", p(&mask), "-o", p(&observed)]);
    let wild = f.write("wild.toml", "[svt]\ntau = 1\ndelta = 50\nallow_large_step = true\n");
    let out = run(&["complete", "-i", p(&observed), "--mask", p(&mask), "--config", p(&wild), "-o", p(&f.path("x.mtx"))]);
    assert_eq!(out.status.code(), Some(exit::NUMERIC), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["complete", "-i", p(&observed), "--mask", p(&mask), "--tau=-1", "-o", p(&f.path("x.mtx"))]);
    assert_eq!(out.status.code(), Some(exit::CONFIG));

    let out = run(&["mask", "--fraction", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_peak_synthetic_is_rank_one() {
    let f = Files::new();
    let config = f.write(
        "one.toml",
        "[synthetic]\npeaks = [{ nu1_mhz = 2.0, nu2_mhz = 3.0, amplitude = 1.0 }]\n[grid]\nn1 = 32\nn2 = 32\n",
    );
    let (m, sv) = (f.path("m.mtx"), f.path("sv.csv"));
    ok(&["simulate", "--config", p(&config), "-o", p(&m)]);
    ok(&["analyze", "--reference", p(&m), "-i", p(&m), "--singular-values", p(&sv)]);
    let sigma: Vec<f64> = csv::Reader::from_path(&sv)
        .unwrap()
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert!(sigma[1] / sigma[0] < 1e-10, "{:?}", &sigma[..3]);
}
