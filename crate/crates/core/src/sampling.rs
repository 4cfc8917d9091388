//! Random observation sets Ω and the sampling projection P_Ω.

use crate::error::{invalid, Error, Result};
use crate::linalg::{DenseMatrix, Scalar};
use crate::rng::SeededRng;

/// Set of observed entries of a `rows×cols` host matrix.
///
/// Indices are 0-based, distinct and kept in row-major (lexicographic)
/// order. `seed` records the generator seed, or 0 for masks built by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    rows: usize,
    cols: usize,
    indices: Vec<(usize, usize)>,
    seed: u64,
}

/// `round(fraction · rows · cols)` with halves rounded away from zero.
pub fn sample_count(rows: usize, cols: usize, fraction: f64) -> usize {
    (fraction * (rows * cols) as f64).round() as usize
}

impl SampleMask {
    /// Builds a mask from arbitrary indices; duplicates are rejected.
    pub fn from_indices(rows: usize, cols: usize, mut indices: Vec<(usize, usize)>, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("shape", "mask host dimensions must be positive"));
        }
        if indices.is_empty() {
            return Err(invalid("indices", "a mask needs at least one index"));
        }
        if let Some(&(i, j)) = indices.iter().find(|&&(i, j)| i >= rows || j >= cols) {
            return Err(invalid("indices", format!("({i}, {j}) lies outside {rows}x{cols}")));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid("indices", format!("duplicate index {:?}", w[0])));
        }
        Ok(Self {
            rows,
            cols,
            indices,
            seed,
        })
    }

    /// Every entry of the host.
    pub fn full(rows: usize, cols: usize) -> Self {
        let indices = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect();
        Self {
            rows,
            cols,
            indices,
            seed: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.rows * self.cols
    }

    pub fn fraction(&self) -> f64 {
        self.indices.len() as f64 / (self.rows * self.cols) as f64
    }

    /// Sorted row-major index pairs.
    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.indices.binary_search(&(i, j)).is_ok()
    }

    /// Dense 0/1 indicator in row-major order.
    pub fn indicator(&self) -> Vec<bool> {
        let mut flags = vec![false; self.rows * self.cols];
        for &(i, j) in &self.indices {
            flags[i * self.cols + j] = true;
        }
        flags
    }

    pub(crate) fn ensure_matches<T: Scalar>(&self, m: &DenseMatrix<T>) -> Result<()> {
        if m.shape() != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                found: m.shape(),
            });
        }
        Ok(())
    }
}

/// Uniform mask of exactly `round(fraction·rows·cols)` distinct entries.
///
/// Draws a partial Fisher–Yates shuffle of the flattened index range
/// `0..rows·cols` with [`SeededRng`]: for `k` in `0..count`, swap position
/// `k` with `k + next_below(total − k)`. The first `count` positions are
/// the sample, stored sorted.
pub fn generate_uniform_mask(rows: usize, cols: usize, fraction: f64, seed: u64) -> Result<SampleMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    if rows == 0 || cols == 0 {
        return Err(invalid("shape", "mask host dimensions must be positive"));
    }
    let total = rows * cols;
    let count = sample_count(rows, cols, fraction);
    if count < 1 {
        return Err(invalid(
            "fraction",
            format!("{fraction} of {total} entries rounds to an empty mask"),
        ));
    }
    let mut rng = SeededRng::new(seed);
    let mut slots: Vec<usize> = (0..total).collect();
    for k in 0..count {
        let pick = k + rng.next_below((total - k) as u64) as usize;
        slots.swap(k, pick);
    }
    let mut chosen = slots[..count].to_vec();
    chosen.sort_unstable();
    Ok(SampleMask {
        rows,
        cols,
        indices: chosen.into_iter().map(|f| (f / cols, f % cols)).collect(),
        seed,
    })
}

/// P_Ω: keeps the entries on the mask and zeroes the rest.
pub fn project<T: Scalar>(m: &DenseMatrix<T>, mask: &SampleMask) -> Result<DenseMatrix<T>> {
    mask.ensure_matches(m)?;
    let mut out = DenseMatrix::zeros(m.rows(), m.cols());
    for &(i, j) in mask.indices() {
        out[(i, j)] = m[(i, j)];
    }
    Ok(out)
}

/// All host indices outside the mask.
pub fn mask_complement(mask: &SampleMask) -> Result<SampleMask> {
    if mask.is_full() {
        return Err(Error::EmptyComplement);
    }
    let flags = mask.indicator();
    let indices = flags
        .iter()
        .enumerate()
        .filter(|(_, &on)| !on)
        .map(|(f, _)| (f / mask.cols, f % mask.cols))
        .collect();
    Ok(SampleMask {
        rows: mask.rows,
        cols: mask.cols,
        indices,
        seed: mask.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;

    fn random(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut rng = SeededRng::new(seed);
        RealMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
    }

    #[test]
    fn ten_percent_of_201_squared() {
        let m = generate_uniform_mask(201, 201, 0.10, 3).unwrap();
        assert_eq!(m.len(), 4040);
        assert!(m.indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn full_fraction_selects_everything() {
        let m = generate_uniform_mask(10, 10, 1.0, 99).unwrap();
        assert_eq!(m.len(), 100);
        assert!(m.is_full());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_uniform_mask(100, 100, 0.2, 5).unwrap();
        let b = generate_uniform_mask(100, 100, 0.2, 5).unwrap();
        let c = generate_uniform_mask(100, 100, 0.2, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_fractions() {
        for f in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(generate_uniform_mask(5, 5, f, 0).is_err());
        }
        assert!(generate_uniform_mask(5, 5, 0.01, 0).is_err());
    }

    #[test]
    fn round_half_away_from_zero() {
        assert_eq!(sample_count(1, 10, 0.25), 3);
        assert_eq!(sample_count(1, 2, 0.25), 1);
    }

    #[test]
    fn projection_properties() {
        let m = random(12, 9, 1);
        let full = SampleMask::full(12, 9);
        assert_eq!(project(&m, &full).unwrap(), m);

        let mask = generate_uniform_mask(12, 9, 0.3, 2).unwrap();
        let once = project(&m, &mask).unwrap();
        assert_eq!(project(&once, &mask).unwrap(), once);

        let comp = mask_complement(&mask).unwrap();
        let a = project(&m, &mask).unwrap().sum_squares();
        let b = project(&m, &comp).unwrap().sum_squares();
        assert!((a + b - m.sum_squares()).abs() < 1e-12 * m.sum_squares());

        assert!(project(&RealMatrix::zeros(3, 3), &mask).is_err());
    }

    #[test]
    fn complement_cases() {
        assert_eq!(mask_complement(&SampleMask::full(3, 3)), Err(Error::EmptyComplement));
        let single = SampleMask::from_indices(2, 2, vec![(1, 0)], 0).unwrap();
        let comp = mask_complement(&single).unwrap();
        assert_eq!(comp.len(), 3);
        assert!(!comp.contains(1, 0));
        let m = generate_uniform_mask(7, 5, 0.4, 8).unwrap();
        assert_eq!(mask_complement(&mask_complement(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn from_indices_validation() {
        assert!(SampleMask::from_indices(2, 2, vec![], 0).is_err());
        assert!(SampleMask::from_indices(2, 2, vec![(2, 0)], 0).is_err());
        assert!(SampleMask::from_indices(2, 2, vec![(0, 1), (0, 1)], 0).is_err());
        let m = SampleMask::from_indices(2, 2, vec![(1, 1), (0, 1)], 0).unwrap();
        assert_eq!(m.indices(), &[(0, 1), (1, 1)]);
    }

    #[test]
    fn single_entry_masks_are_uniform() {
        let trials = 10_000u64;
        let mut counts = [0u32; 100];
        for s in 0..trials {
            let m = generate_uniform_mask(10, 10, 0.01, s).unwrap();
            let (i, j) = m.indices()[0];
            counts[i * 10 + j] += 1;
        }
        let p = 0.01;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 5.0 * sd, "count {c}");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
        // 99 degrees of freedom; the 0.9999 quantile is about 157.
        assert!(chi2 < 157.0, "chi2 {chi2}");
    }
}
