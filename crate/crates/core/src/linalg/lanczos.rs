//! Partial SVD by Golub–Kahan–Lanczos bidiagonalisation with full
//! reorthogonalisation.
//!
//! Only the triplets above a threshold are wanted by the thresholding step, and
//! the iterates it is applied to are supported on the sample set, so a Krylov
//! method driven by sparse products is far cheaper than a dense SVD at the
//! sizes used here. The start vector is a fixed pseudo-random vector, which
//! keeps the result a deterministic function of the operator.

use super::matrix::RealMatrix;
use super::svd::{normalize_signs, SvdFactorization};
use crate::error::{Error, Result};
use crate::rng::{SeededRng, LANCZOS_STREAM};

/// A real `m×n` linear map accessed only through products.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x`, with `out` of length `nrows`.
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Aᵀ y`, with `out` of length `ncols`.
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]);
}

impl LinearOperator for RealMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
    }
}

/// Relative Ritz residual below which a triplet counts as converged.
const RESIDUAL_TOL: f64 = 1e-13;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram–Schmidt against `basis`.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// A unit vector orthogonal to `basis`, drawn deterministically.
fn fresh_direction(len: usize, basis: &[Vec<f64>], rng: &mut SeededRng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut w: Vec<f64> = (0..len).map(|_| rng.next_f64() - 0.5).collect();
        reorthogonalize(&mut w, basis);
        let nw = norm(&w);
        if nw > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nw);
            return Some(w);
        }
    }
    None
}

struct Bidiagonalization {
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    next_v: Vec<f64>,
    rng: SeededRng,
    scale: f64,
}

impl Bidiagonalization {
    fn new(n: usize) -> Self {
        let mut rng = SeededRng::new(LANCZOS_STREAM);
        let start = fresh_direction(n, &[], &mut rng).expect("nonempty start vector");
        Self {
            u: Vec::new(),
            v: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            next_v: start,
            rng,
            scale: 0.0,
        }
    }

    fn steps(&self) -> usize {
        self.alpha.len()
    }

    /// Extends the factorisation `A V = U B` by one column.
    fn step<A: LinearOperator>(&mut self, op: &A) {
        let (m, n) = (op.nrows(), op.ncols());
        let v = std::mem::take(&mut self.next_v);
        let mut w = vec![0.0; m];
        op.apply(&v, &mut w);
        if let (Some(prev), Some(&b)) = (self.u.last(), self.beta.last()) {
            for (x, y) in w.iter_mut().zip(prev) {
                *x -= b * y;
            }
        }
        reorthogonalize(&mut w, &self.u);
        let mut a = norm(&w);
        self.scale = self.scale.max(a);
        if a <= 1e-14 * self.scale.max(f64::MIN_POSITIVE) || a == 0.0 {
            a = 0.0;
            w = fresh_direction(m, &self.u, &mut self.rng).unwrap_or_else(|| vec![0.0; m]);
        } else {
            w.iter_mut().for_each(|x| *x /= a);
        }
        self.alpha.push(a);
        self.v.push(v);

        let mut z = vec![0.0; n];
        op.apply_transpose(&w, &mut z);
        let last_v = self.v.last().expect("just pushed");
        for (x, y) in z.iter_mut().zip(last_v) {
            *x -= a * y;
        }
        self.u.push(w);
        reorthogonalize(&mut z, &self.v);
        let mut b = norm(&z);
        self.scale = self.scale.max(b);
        if b <= 1e-14 * self.scale.max(f64::MIN_POSITIVE) || b == 0.0 {
            b = 0.0;
            z = fresh_direction(n, &self.v, &mut self.rng).unwrap_or_else(|| vec![0.0; n]);
        } else {
            z.iter_mut().for_each(|x| *x /= b);
        }
        self.beta.push(b);
        self.next_v = z;
    }
}

/// Triplets of `op` with singular value strictly above `threshold`, or
/// `None` when the Krylov space needed would exceed `max_steps` (the caller
/// should then fall back to a dense SVD).
///
/// `rank_hint` seeds the initial Krylov dimension. When the space reaches
/// `min(m, n)` the bidiagonal factorisation is complete and exact.
pub fn partial_svd_above<A: LinearOperator>(
    op: &A,
    threshold: f64,
    rank_hint: usize,
    max_steps: usize,
) -> Result<Option<SvdFactorization>> {
    let (m, n) = (op.nrows(), op.ncols());
    let full = m.min(n);
    let max_steps = max_steps.min(full);
    let mut target = (rank_hint + rank_hint / 2 + 10).min(max_steps).max(1);
    let mut lanczos = Bidiagonalization::new(n);

    loop {
        while lanczos.steps() < target {
            lanczos.step(op);
        }
        let k = lanczos.steps();
        let b = faer::Mat::from_fn(k, k, |i, j| {
            if i == j {
                lanczos.alpha[i]
            } else if j == i + 1 {
                lanczos.beta[i]
            } else {
                0.0
            }
        });
        let small = b.thin_svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = small.S().column_vector();
        let p = small.U();
        let q = small.V();
        let sigma: Vec<f64> = (0..k).map(|i| s[i].max(0.0)).collect();
        let exhausted = k == full;
        let beta_k = *lanczos.beta.last().expect("at least one step");
        let tol = RESIDUAL_TOL * sigma[0].max(lanczos.scale).max(f64::MIN_POSITIVE);
        let residual = |i: usize| (beta_k * p[(k - 1, i)]).abs();

        let above = sigma.iter().take_while(|&&x| x > threshold).count();
        // The triplets kept, plus the first one below the threshold, must
        // have converged for the cut to be certified.
        let certified = exhausted || (above < k && (0..=above).all(|i| residual(i) <= tol));

        if certified {
            let mut u = RealMatrix::zeros(m, above.max(1));
            let mut v = RealMatrix::zeros(n, above.max(1));
            for l in 0..above {
                for (j, basis) in lanczos.u.iter().enumerate() {
                    let c = p[(j, l)];
                    for (i, x) in basis.iter().enumerate() {
                        u[(i, l)] += c * x;
                    }
                }
                for (j, basis) in lanczos.v.iter().enumerate() {
                    let c = q[(j, l)];
                    for (i, x) in basis.iter().enumerate() {
                        v[(i, l)] += c * x;
                    }
                }
            }
            normalize_signs(&mut u, &mut v);
            return Ok(Some(SvdFactorization {
                u,
                singular_values: sigma[..above].to_vec(),
                v,
            }));
        }
        if k >= max_steps {
            return Ok(None);
        }
        target = (k + (k / 2).max(8)).min(max_steps);
    }
}
