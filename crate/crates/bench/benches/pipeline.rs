use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use eseem_mc_bench::{gaussian, synthetic};
use eseem_mc_core::linalg::{shrink, svd};
use eseem_mc_core::sampling::{generate_uniform_mask, project};
use eseem_mc_core::spectral::dft2;
use eseem_mc_core::spin_sim::presets::lowrank_synthetic;
use eseem_mc_core::svt::{svt_complete, SvdStrategy, SvtParams};
use std::hint::black_box;

fn svd_benches(c: &mut Criterion) {
    let mut g = c.benchmark_group("svd");
    for n in [64, 201] {
        let a = gaussian(n, n, 1);
        g.bench_function(format!("full_{n}"), |b| b.iter(|| svd(black_box(&a)).unwrap()));
        g.bench_function(format!("shrink_{n}"), |b| b.iter(|| shrink(black_box(&a), 5.0).unwrap()));
    }
    g.finish();
}

fn svt_benches(c: &mut Criterion) {
    let m = synthetic();
    let (rows, cols) = m.shape();
    let mut g = c.benchmark_group("svt");
    g.sample_size(10);
    for fraction in [0.1, 0.3] {
        let mask = generate_uniform_mask(rows, cols, fraction, 7).unwrap();
        let observed = project(&m, &mask).unwrap();
        for (label, strategy) in [("auto", SvdStrategy::Auto), ("dense", SvdStrategy::Dense)] {
            // A fixed iteration count keeps the per-iteration cost comparable.
            let params = SvtParams {
                max_iterations: 50,
                svd: strategy,
                ..SvtParams::default()
            };
            g.bench_function(format!("{label}_{fraction}_50it"), |b| {
                b.iter(|| svt_complete(black_box(&observed), &mask, &params).unwrap())
            });
        }
    }
    g.finish();
}

fn dft_benches(c: &mut Criterion) {
    let experiment = lowrank_synthetic();
    let m = synthetic();
    c.bench_function("dft2_201", |b| {
        b.iter_batched(|| m.clone(), |m| dft2(&m, &experiment.grid).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, svd_benches, svt_benches, dft_benches);
criterion_main!(benches);
