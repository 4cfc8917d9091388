//! Singular value thresholding (SVT) matrix completion.
//!
//! Starting from `Y⁰`, each iteration computes
//!
//! ```text
//! Xᵏ = shrink(Yᵏ⁻¹, τ)
//! Yᵏ = Yᵏ⁻¹ + δ P_Ω(M − Xᵏ)
//! ```
//!
//! and stops once `‖P_Ω(Xᵏ − M)‖_F / ‖P_Ω(M)‖_F < ε`. Because `Y⁰` and
//! every update live on Ω, the iterate is stored as its values on the mask
//! and the thresholding never forms a dense SVD of `Y`: it uses the
//! eigendecomposition of the Gram matrix `YᵀY`, built from the sparse entries,
//! and keeps only the eigenpairs above `τ²`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    normalize_signs, shrink_factors, spectral_norm, truncate_shrunk, LinearOperator, RealMatrix,
    SvdFactorization,
};
use crate::sampling::SampleMask;

/// Residual above which an iteration is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// How `Y⁰` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvtInit {
    /// `Y⁰ = k₀ δ P_Ω(M)` with `k₀ = ⌈τ / (δ ‖P_Ω(M)‖₂)⌉`, skipping the
    /// iterations in which every singular value would be thresholded away.
    #[default]
    KickStart,
    Zero,
}

/// Which SVD backs the thresholding step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdStrategy {
    /// Gram-matrix eigendecomposition built from the sparse iterate; small
    /// problems use the dense SVD.
    #[default]
    Auto,
    /// Full dense SVD at every iteration.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvtParams {
    pub tau: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub store_history: bool,
    pub init: SvtInit,
    pub svd: SvdStrategy,
    /// Permit `delta >= 2`, outside the provably convergent range.
    pub allow_large_step: bool,
}

impl Default for SvtParams {
    fn default() -> Self {
        Self {
            tau: 100.0,
            delta: 1.2,
            epsilon: 1e-4,
            max_iterations: 5000,
            store_history: false,
            init: SvtInit::KickStart,
            svd: SvdStrategy::Auto,
            allow_large_step: false,
        }
    }
}

impl SvtParams {
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", format!("must be positive and finite, got {}", self.tau)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive and finite, got {}", self.delta)));
        }
        if self.delta >= 2.0 && !self.allow_large_step {
            return Err(invalid(
                "delta",
                format!("{} is outside the convergent range (0, 2); set allow_large_step to override", self.delta),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive and finite, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    /// True when the step size lies outside `(0, 2)`.
    pub fn is_large_step(&self) -> bool {
        self.delta >= 2.0
    }
}

/// Defaults for a `rows×cols` problem: `τ = 5·max(rows, cols)`, `δ = 1.2`,
/// `ε = 1e-4`, at most 5000 iterations.
pub fn default_params(rows: usize, cols: usize, _observed_count: usize) -> SvtParams {
    SvtParams {
        tau: 5.0 * rows.max(cols) as f64,
        ..SvtParams::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvtResult {
    /// `X` at termination.
    pub completed: RealMatrix,
    pub iterations: usize,
    /// Stopping-rule residual per iteration, when requested.
    pub residual_history: Option<Vec<f64>>,
    pub final_residual: f64,
    pub converged: bool,
    /// Number of singular values above τ at the last thresholding.
    pub final_rank: usize,
}

/// `‖P_Ω(X − M)‖_F / ‖P_Ω(M)‖_F`.
pub fn residual(x: &RealMatrix, observed: &RealMatrix, mask: &SampleMask) -> Result<f64> {
    mask.ensure_matches(x)?;
    mask.ensure_matches(observed)?;
    let (mut num, mut den) = (0.0, 0.0);
    for &(i, j) in mask.indices() {
        let m = observed[(i, j)];
        num += (x[(i, j)] - m).powi(2);
        den += m * m;
    }
    if den == 0.0 {
        return Err(Error::ZeroObservation);
    }
    Ok((num / den).sqrt())
}

/// The iterate `Y`, stored by its values on Ω.
struct MaskedOperator<'a> {
    rows: usize,
    cols: usize,
    indices: &'a [(usize, usize)],
    values: &'a [f64],
}

impl LinearOperator for MaskedOperator<'_> {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (&(i, j), &v) in self.indices.iter().zip(self.values) {
            out[i] += v * x[j];
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (&(i, j), &v) in self.indices.iter().zip(self.values) {
            out[j] += v * y[i];
        }
    }
}

impl MaskedOperator<'_> {
    fn to_dense(&self) -> RealMatrix {
        let mut y = RealMatrix::zeros(self.rows, self.cols);
        for (&(i, j), &v) in self.indices.iter().zip(self.values) {
            y[(i, j)] = v;
        }
        y
    }

    /// `YᵀY` (or `YYᵀ` when `Y` is wide) and whether `Y` is wide.
    fn gram(&self) -> (faer::Mat<f64>, bool) {
        let mut y = faer::Mat::<f64>::zeros(self.rows, self.cols);
        for (&(i, j), &v) in self.indices.iter().zip(self.values) {
            y[(i, j)] = v;
        }
        let wide = self.cols > self.rows;
        let g = if wide { &y * y.transpose() } else { y.transpose() * &y };
        (g, wide)
    }
}

/// Soft-thresholded factors of `Y` from the eigendecomposition of its Gram
/// matrix: eigenpairs `(σ², v)` with `σ > τ` give `u = Y v / σ`.
fn gram_threshold(op: &MaskedOperator<'_>, tau: f64) -> Result<SvdFactorization> {
    let (g, wide) = op.gram();
    let dim = g.nrows();
    let eig = g
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    // Ascending order; walk from the top.
    let kept: Vec<usize> = (0..dim).rev().take_while(|&l| values[l] > tau * tau).collect();
    let r = kept.len();
    let other = if wide { op.cols } else { op.rows };
    let mut small = RealMatrix::zeros(dim, r.max(1));
    let mut large = RealMatrix::zeros(other, r.max(1));
    let mut sigma = Vec::with_capacity(r);
    let mut image = vec![0.0; other];
    let mut column = vec![0.0; dim];
    for (c, &l) in kept.iter().enumerate() {
        let s = values[l].sqrt();
        for (a, x) in column.iter_mut().enumerate() {
            *x = vectors[(a, l)];
            small[(a, c)] = *x;
        }
        if wide {
            op.apply_transpose(&column, &mut image);
        } else {
            op.apply(&column, &mut image);
        }
        for (b, &x) in image.iter().enumerate() {
            large[(b, c)] = x / s;
        }
        sigma.push(s);
    }
    let (mut u, mut v) = if wide { (small, large) } else { (large, small) };
    normalize_signs(&mut u, &mut v);
    Ok(truncate_shrunk(
        SvdFactorization {
            u,
            singular_values: sigma,
            v,
        },
        tau,
    ))
}

fn threshold(op: &MaskedOperator<'_>, tau: f64, strategy: SvdStrategy) -> Result<SvdFactorization> {
    if strategy == SvdStrategy::Dense || op.rows.min(op.cols) < 32 {
        return shrink_factors(&op.to_dense(), tau);
    }
    gram_threshold(op, tau)
}

/// Completes `observed` (zero off `mask`) by SVT.
pub fn svt_complete(observed: &RealMatrix, mask: &SampleMask, params: &SvtParams) -> Result<SvtResult> {
    params.validate()?;
    mask.ensure_matches(observed)?;
    observed.ensure_finite()?;
    let flags = mask.indicator();
    if let Some(k) = observed
        .as_slice()
        .iter()
        .zip(&flags)
        .position(|(&v, &on)| !on && v != 0.0)
    {
        return Err(Error::UnmaskedEntry {
            row: k / observed.cols(),
            col: k % observed.cols(),
        });
    }

    let (rows, cols) = observed.shape();
    let indices = mask.indices();
    let target: Vec<f64> = indices.iter().map(|&(i, j)| observed[(i, j)]).collect();
    let target_norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    if target_norm == 0.0 {
        return Err(Error::ZeroObservation);
    }

    let mut y: Vec<f64> = match params.init {
        SvtInit::Zero => vec![0.0; target.len()],
        SvtInit::KickStart => {
            let k0 = (params.tau / (params.delta * spectral_norm(observed)?)).ceil().max(1.0);
            target.iter().map(|v| k0 * params.delta * v).collect()
        }
    };

    let mut history = params.store_history.then(Vec::new);
    let mut x_on_mask = vec![0.0; target.len()];
    let mut factors;
    let mut rank;
    let mut iteration = 0;
    let mut res;
    loop {
        iteration += 1;
        let op = MaskedOperator {
            rows,
            cols,
            indices,
            values: &y,
        };
        factors = threshold(&op, params.tau, params.svd)?;
        rank = factors.len();

        let mut num = 0.0;
        for (t, &(i, j)) in indices.iter().enumerate() {
            let mut x = 0.0;
            for l in 0..rank {
                x += factors.singular_values[l] * factors.u[(i, l)] * factors.v[(j, l)];
            }
            x_on_mask[t] = x;
            num += (x - target[t]).powi(2);
        }
        res = num.sqrt() / target_norm;
        if !res.is_finite() {
            return Err(Error::NonFiniteIterate { iteration });
        }
        if let Some(h) = history.as_mut() {
            h.push(res);
        }
        if res < params.epsilon {
            break;
        }
        if res > DIVERGENCE_GUARD {
            return Err(Error::Diverged { iteration, residual: res });
        }
        if iteration >= params.max_iterations {
            break;
        }
        for ((yv, &m), &x) in y.iter_mut().zip(&target).zip(&x_on_mask) {
            *yv += params.delta * (m - x);
        }
    }

    Ok(SvtResult {
        completed: factors.reconstruct(),
        iterations: iteration,
        residual_history: history,
        final_residual: res,
        converged: res < params.epsilon,
        final_rank: rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sampling::{generate_uniform_mask, project};

    fn rank_one(n: usize, seed: u64) -> RealMatrix {
        let mut rng = SeededRng::new(seed);
        let u: Vec<f64> = (0..n).map(|_| 1.0 + rng.next_f64()).collect();
        let v: Vec<f64> = (0..n).map(|_| 0.5 + rng.next_f64()).collect();
        RealMatrix::from_fn(n, n, |i, j| u[i] * v[j])
    }

    fn rank_r(n: usize, r: usize, seed: u64) -> RealMatrix {
        let mut rng = SeededRng::new(seed);
        let a = RealMatrix::from_fn(n, r, |_, _| rng.next_gaussian());
        let b = RealMatrix::from_fn(r, n, |_, _| rng.next_gaussian());
        a.matmul(&b).unwrap()
    }

    fn random(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut rng = SeededRng::new(seed);
        RealMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
    }

    fn rel_err(x: &RealMatrix, m: &RealMatrix) -> f64 {
        (x - m).sum_squares().sqrt() / m.sum_squares().sqrt()
    }

    #[test]
    fn residual_examples() {
        let m = rank_one(6, 1);
        let mask = generate_uniform_mask(6, 6, 0.5, 2).unwrap();
        let obs = project(&m, &mask).unwrap();
        assert_eq!(residual(&obs, &obs, &mask).unwrap(), 0.0);
        assert_eq!(residual(&RealMatrix::zeros(6, 6), &obs, &mask).unwrap(), 1.0);
        assert!((residual(&obs.scaled(2.0), &obs, &mask).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            residual(&obs, &RealMatrix::zeros(6, 6), &mask),
            Err(Error::ZeroObservation)
        );
    }

    #[test]
    fn default_rule() {
        assert_eq!(default_params(201, 201, 0).tau, 1005.0);
        assert_eq!(default_params(100, 100, 0).tau, 500.0);
        let p = default_params(50, 200, 10);
        assert_eq!(p.tau, 1000.0);
        assert_eq!((p.delta, p.epsilon, p.max_iterations), (1.2, 1e-4, 5000));
    }

    #[test]
    fn param_validation() {
        assert!(SvtParams::default().validate().is_ok());
        assert!(SvtParams::default().with_tau(0.0).validate().is_err());
        let big = SvtParams {
            delta: 2.5,
            ..SvtParams::default()
        };
        assert!(big.validate().is_err());
        let overridden = SvtParams {
            allow_large_step: true,
            ..big
        };
        assert!(overridden.validate().is_ok());
        assert!(overridden.is_large_step());
        let eps = SvtParams {
            epsilon: 0.0,
            ..SvtParams::default()
        };
        assert!(eps.validate().is_err());
    }

    #[test]
    fn rejects_unmasked_and_empty_data() {
        let m = rank_one(8, 3);
        let mask = generate_uniform_mask(8, 8, 0.5, 4).unwrap();
        let err = svt_complete(&m, &mask, &SvtParams::default()).unwrap_err();
        assert!(matches!(err, Error::UnmaskedEntry { .. }));
        let zero = RealMatrix::zeros(8, 8);
        assert_eq!(svt_complete(&zero, &mask, &SvtParams::default()), Err(Error::ZeroObservation));
    }

    fn well_covered(mask: &SampleMask, min_count: usize) -> bool {
        let mut rows = vec![0; mask.rows()];
        let mut cols = vec![0; mask.cols()];
        for &(i, j) in mask.indices() {
            rows[i] += 1;
            cols[j] += 1;
        }
        rows.iter().chain(&cols).all(|&c| c >= min_count)
    }

    /// Errors for 15 well-covered 10×10 rank-one instances at threshold `tau`.
    fn rank_one_errors(tau: f64) -> Vec<f64> {
        let params = SvtParams {
            tau,
            store_history: true,
            max_iterations: 50_000,
            ..SvtParams::default()
        };
        let mut errors = Vec::new();
        let mut seed = 0;
        while errors.len() < 15 {
            seed += 1;
            let mask = generate_uniform_mask(10, 10, 0.5, 1000 + seed).unwrap();
            if !well_covered(&mask, 3) {
                continue;
            }
            let m = rank_one(10, seed);
            let obs = project(&m, &mask).unwrap();
            let r = svt_complete(&obs, &mask, &params).unwrap();
            assert!(r.converged);
            let h = r.residual_history.unwrap();
            assert_eq!(h.len(), r.iterations);
            assert!(r.final_rank <= 10);
            errors.push(rel_err(&r.completed, &m));
        }
        errors
    }

    // At τ = 50 the threshold is only a few times ‖M‖, so the regularised
    // fixed point differs from M on some masks; those errors do not shrink
    // with ε. Larger τ removes most of that bias.
    #[test]
    fn rank_one_half_sampled() {
        let hits = |e: &[f64]| e.iter().filter(|&&x| x < 1e-3).count();
        let at_50 = rank_one_errors(50.0);
        assert!(hits(&at_50) >= 5, "{at_50:?}");
        let at_200 = rank_one_errors(200.0);
        assert!(hits(&at_200) >= 12, "{at_200:?}");
    }

    #[test]
    fn full_mask_exact_on_omega() {
        let m = rank_r(20, 2, 7);
        let mask = SampleMask::full(20, 20);
        let params = SvtParams::default();
        let r = svt_complete(&m, &mask, &params).unwrap();
        assert!(r.converged);
        assert!(residual(&r.completed, &m, &mask).unwrap() < params.epsilon);
        assert!(r.iterations <= params.max_iterations);
        assert!(r.residual_history.is_none());
    }

    #[test]
    fn gram_and_dense_paths_agree() {
        // Tall, wide, and a small threshold that keeps a high-rank iterate.
        let cases = [((60, 60), 0.4, 300.0), ((40, 70), 0.5, 200.0), ((90, 50), 0.3, 5.0)];
        for (s, ((rows, cols), fraction, tau)) in cases.into_iter().enumerate() {
            let seed = 11 + 2 * s as u64;
            let a = random(rows, 3, seed);
            let b = random(3, cols, seed + 1);
            let m = a.matmul(&b).unwrap().scaled(10.0);
            let mask = generate_uniform_mask(rows, cols, fraction, seed + 2).unwrap();
            let obs = project(&m, &mask).unwrap();
            let auto = SvtParams {
                tau,
                max_iterations: 300,
                ..SvtParams::default()
            };
            let dense = SvtParams {
                svd: SvdStrategy::Dense,
                ..auto.clone()
            };
            let g = svt_complete(&obs, &mask, &auto).unwrap();
            let d = svt_complete(&obs, &mask, &dense).unwrap();
            assert_eq!(g.iterations, d.iterations, "case {s}");
            assert_eq!(g.final_rank, d.final_rank, "case {s}");
            assert!(rel_err(&g.completed, &d.completed) < 1e-9, "case {s}");
        }
    }

    #[test]
    fn zero_start_also_converges() {
        let m = rank_one(10, 13);
        let mask = generate_uniform_mask(10, 10, 0.6, 14).unwrap();
        let obs = project(&m, &mask).unwrap();
        let params = SvtParams {
            tau: 50.0,
            init: SvtInit::Zero,
            ..SvtParams::default()
        };
        let r = svt_complete(&obs, &mask, &params).unwrap();
        assert!(r.converged);
    }

    #[test]
    fn oversized_step_diverges_or_caps() {
        let m = rank_r(15, 2, 21);
        let mask = generate_uniform_mask(15, 15, 0.5, 22).unwrap();
        let obs = project(&m, &mask).unwrap();
        let params = SvtParams {
            tau: 10.0,
            delta: 3.5,
            allow_large_step: true,
            max_iterations: 400,
            ..SvtParams::default()
        };
        match svt_complete(&obs, &mask, &params) {
            Err(Error::Diverged { residual, .. }) => assert!(residual > DIVERGENCE_GUARD),
            Ok(r) => assert!(r.iterations <= 400),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn deterministic() {
        let m = rank_r(40, 3, 31);
        let mask = generate_uniform_mask(40, 40, 0.3, 32).unwrap();
        let obs = project(&m, &mask).unwrap();
        let p = SvtParams {
            tau: 200.0,
            store_history: true,
            ..SvtParams::default()
        };
        assert_eq!(svt_complete(&obs, &mask, &p).unwrap(), svt_complete(&obs, &mask, &p).unwrap());
    }
}
