//! 2D spectra of time-domain matrices and peak picking.
//!
//! The forward transform is unnormalised,
//! `X(k, l) = Σ_ij M(i, j) e^{−2πi(ik/n1 + jl/n2)}`, so Parseval reads
//! `‖X‖_F² = n1·n2·‖M‖_F²`. Spectra are stored frequency-centred: bin `k`
//! of an axis of length `n` sits at `(k − ⌊n/2⌋)/(n·dt)` Hz.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, RealMatrix};
use crate::spin_sim::EseemGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    /// Centred spectrum, rows along ν1.
    pub values: ComplexMatrix,
    /// Bin-centre frequencies, Hz, strictly increasing.
    pub freq1: Vec<f64>,
    pub freq2: Vec<f64>,
    /// Grid of the transformed time-domain data.
    pub grid: EseemGrid,
}

/// A local maximum of the magnitude map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub row: usize,
    pub col: usize,
    /// Bin-centre frequencies, Hz.
    pub nu1: f64,
    pub nu2: f64,
    pub amplitude: f64,
}

/// Centred frequency axis for `n` bins at dwell time `dt`.
pub fn frequency_axis(n: usize, dt: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    (0..n).map(|k| (k as f64 - half) / (n as f64 * dt)).collect()
}

fn fft_axis(data: &mut [Complex64], rows: usize, cols: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(cols);
    for r in 0..rows {
        fft.process(&mut data[r * cols..(r + 1) * cols]);
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Unnormalised 2D DFT, frequency-centred.
pub fn dft2(m: &RealMatrix, grid: &EseemGrid) -> Result<Spectrum2D> {
    dft2_zero_filled(m, grid, 1)
}

/// [`dft2`] after zero-padding each axis to `factor` times its length.
pub fn dft2_zero_filled(m: &RealMatrix, grid: &EseemGrid, factor: usize) -> Result<Spectrum2D> {
    grid.validate()?;
    m.ensure_shape((grid.n1, grid.n2))?;
    let values = centred_transform(m, factor)?;
    let (n1, n2) = values.shape();
    Ok(Spectrum2D {
        values,
        freq1: frequency_axis(n1, grid.dt1),
        freq2: frequency_axis(n2, grid.dt2),
        grid: *grid,
    })
}

/// Centred unnormalised 2D DFT of `m` zero-padded by `factor`, without
/// frequency axes.
pub fn centred_transform(m: &RealMatrix, factor: usize) -> Result<ComplexMatrix> {
    m.ensure_finite()?;
    if factor == 0 {
        return Err(invalid("zero_fill", "factor must be at least 1"));
    }
    let (n1, n2) = (m.rows() * factor, m.cols() * factor);
    let mut data = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            data[i * n2 + j] = Complex64::new(m[(i, j)], 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    fft_axis(&mut data, n1, n2, &mut planner);
    let mut t = transpose(&data, n1, n2);
    fft_axis(&mut t, n2, n1, &mut planner);
    let data = transpose(&t, n2, n1);

    let (h1, h2) = (n1 / 2, n2 / 2);
    Ok(ComplexMatrix::from_fn(n1, n2, |r, c| {
        data[((r + n1 - h1) % n1) * n2 + (c + n2 - h2) % n2]
    }))
}

/// Entrywise modulus.
pub fn magnitude(spectrum: &Spectrum2D) -> RealMatrix {
    spectrum.values.map(|z| z.norm())
}

/// Strict 8-neighbour maxima of the magnitude with amplitude at least
/// `rel_threshold` times the global maximum, largest first.
pub fn find_peaks(spectrum: &Spectrum2D, rel_threshold: f64) -> Result<Vec<Peak>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(invalid("rel_threshold", format!("must lie in (0, 1), got {rel_threshold}")));
    }
    let mag = magnitude(spectrum);
    let (n1, n2) = mag.shape();
    let max = mag.as_slice().iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Vec::new());
    }
    let floor = rel_threshold * max;
    let mut peaks = Vec::new();
    for r in 0..n1 {
        for c in 0..n2 {
            let v = mag[(r, c)];
            if v < floor {
                continue;
            }
            let mut strict = true;
            'nbr: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    if rr < 0 || cc < 0 || rr >= n1 as i64 || cc >= n2 as i64 {
                        continue;
                    }
                    if mag[(rr as usize, cc as usize)] >= v {
                        strict = false;
                        break 'nbr;
                    }
                }
            }
            if strict {
                peaks.push(Peak {
                    row: r,
                    col: c,
                    nu1: spectrum.freq1[r],
                    nu2: spectrum.freq2[c],
                    amplitude: v,
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude).then((a.row, a.col).cmp(&(b.row, b.col))));
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::spin_sim::{synthetic_low_rank_signal, SyntheticPeak};
    use std::f64::consts::TAU;

    /// Brute-force O(n⁴) DFT with the same centring.
    fn naive(m: &RealMatrix) -> ComplexMatrix {
        let (n1, n2) = m.shape();
        let (h1, h2) = ((n1 / 2) as i64, (n2 / 2) as i64);
        ComplexMatrix::from_fn(n1, n2, |r, c| {
            let (k, l) = (r as i64 - h1, c as i64 - h2);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n1 {
                for j in 0..n2 {
                    let arg = -TAU * ((i as i64 * k) as f64 / n1 as f64 + (j as i64 * l) as f64 / n2 as f64);
                    acc += m[(i, j)] * Complex64::from_polar(1.0, arg);
                }
            }
            acc
        })
    }

    fn random(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut rng = SeededRng::new(seed);
        RealMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
    }

    fn grid(n1: usize, n2: usize) -> EseemGrid {
        EseemGrid {
            n1,
            n2,
            dt1: 40e-9,
            dt2: 50e-9,
            t1_start: 0.0,
            t2_start: 0.0,
        }
    }

    #[test]
    fn matches_naive_dft() {
        for (n1, n2, seed) in [(16, 16, 1), (7, 12, 2), (5, 5, 3)] {
            let m = random(n1, n2, seed);
            let fast = dft2(&m, &grid(n1, n2)).unwrap().values;
            let slow = naive(&m);
            let err = (&fast - &slow).sum_squares().sqrt() / slow.sum_squares().sqrt();
            assert!(err < 1e-9, "{n1}x{n2}: {err}");
        }
    }

    #[test]
    fn parseval() {
        let m = random(13, 16, 4);
        let s = dft2(&m, &grid(13, 16)).unwrap();
        let lhs = magnitude(&s).sum_squares();
        let rhs = (13 * 16) as f64 * m.sum_squares();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn axes_are_centred() {
        let s = dft2(&random(201, 4, 5), &grid(201, 4)).unwrap();
        assert_eq!(s.freq1.len(), 201);
        assert_eq!(s.freq1[100], 0.0);
        assert!((s.freq1[0] + s.freq1[200]).abs() < 1e-6);
        assert!(s.freq1.windows(2).all(|w| w[1] > w[0]));
        // Even length: one extra negative bin.
        assert_eq!(s.freq2, vec![-0.5 / 50e-9, -0.25 / 50e-9, 0.0, 0.25 / 50e-9]);
    }

    #[test]
    fn constant_is_single_dc_bin() {
        let g = grid(9, 8);
        let s = dft2(&RealMatrix::from_fn(9, 8, |_, _| 2.0), &g).unwrap();
        let mag = magnitude(&s);
        assert!((mag[(4, 4)] - 144.0).abs() < 1e-10);
        assert!(mag.sum_squares() - 144.0f64.powi(2) < 1e-18 * 144.0f64.powi(2) + 1e-20);
    }

    #[test]
    fn separable_cosine_gives_four_bins() {
        let (n, dt) = (32, 40e-9);
        let g = EseemGrid::square(n, dt);
        let (f, h) = (5.0 / (n as f64 * dt), 3.0 / (n as f64 * dt));
        let m = RealMatrix::from_fn(n, n, |i, j| (TAU * f * g.tau1(i)).cos() * (TAU * h * g.tau2(j)).cos());
        let s = dft2(&m, &g).unwrap();
        let peaks = find_peaks(&s, 0.5).unwrap();
        assert_eq!(peaks.len(), 4);
        for p in &peaks {
            assert!((p.nu1.abs() - f).abs() < 1e-3 && (p.nu2.abs() - h).abs() < 1e-3);
            assert!((p.amplitude - (n * n) as f64 / 4.0).abs() < 1e-9);
        }
        let mut quadrants: Vec<(bool, bool)> = peaks.iter().map(|p| (p.nu1 > 0.0, p.nu2 > 0.0)).collect();
        quadrants.sort();
        assert_eq!(quadrants, vec![(false, false), (false, true), (true, false), (true, true)]);
    }

    #[test]
    fn flat_and_zero_spectra_have_no_peaks() {
        let g = grid(6, 6);
        let mut flat = dft2(&RealMatrix::zeros(6, 6), &g).unwrap();
        assert!(find_peaks(&flat, 0.5).unwrap().is_empty());
        assert!(magnitude(&flat).as_slice().iter().all(|&x| x == 0.0));
        flat.values = ComplexMatrix::from_fn(6, 6, |_, _| Complex64::new(1.0, 0.0));
        assert!(find_peaks(&flat, 0.5).unwrap().is_empty());
        assert_eq!(magnitude(&flat), RealMatrix::from_fn(6, 6, |_, _| 1.0));
    }

    #[test]
    fn four_peak_synthetic_gives_sixteen_bins() {
        let g = EseemGrid::square(201, 40e-9);
        let peaks = [(1.0e6, 2.0e6, 1.0), (9.0e6, 0.5e6, 0.8), (3.3e6, 7.1e6, 0.6), (5.2e6, 4.4e6, 0.5)]
            .map(|(nu1, nu2, amplitude)| SyntheticPeak {
                nu1,
                nu2,
                amplitude,
                phase: 0.0,
            });
        let m = synthetic_low_rank_signal(&peaks, &g).unwrap();
        let found = find_peaks(&dft2(&m, &g).unwrap(), 0.3).unwrap();
        assert_eq!(found.len(), 16);
        let bin = 1.0 / (201.0 * 40e-9);
        for p in &peaks {
            for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                assert!(
                    found
                        .iter()
                        .any(|q| (q.nu1 - s1 * p.nu1).abs() <= bin && (q.nu2 - s2 * p.nu2).abs() <= bin),
                    "missing image of {p:?}"
                );
            }
        }
    }

    #[test]
    fn threshold_validated() {
        let s = dft2(&random(4, 4, 1), &grid(4, 4)).unwrap();
        assert!(find_peaks(&s, 0.0).is_err());
        assert!(find_peaks(&s, 1.0).is_err());
    }

    #[test]
    fn zero_fill_interpolates() {
        let g = grid(8, 8);
        let m = random(8, 8, 9);
        let s = dft2_zero_filled(&m, &g, 2).unwrap();
        assert_eq!(s.values.shape(), (16, 16));
        let plain = dft2(&m, &g).unwrap();
        // Even bins of the padded transform are the unpadded bins.
        for r in 0..8 {
            for c in 0..8 {
                assert!((s.values[(2 * r, 2 * c)] - plain.values[(r, c)]).norm() < 1e-10);
            }
        }
        assert!(dft2_zero_filled(&m, &g, 0).is_err());
    }
}
