//! Benchmark fixtures. The benches themselves live in `benches/`.

use eseem_mc_core::rng::SeededRng;
use eseem_mc_core::spin_sim::presets::lowrank_synthetic;
use eseem_mc_core::RealMatrix;

/// Seeded standard-normal matrix.
pub fn gaussian(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    let mut rng = SeededRng::new(seed);
    RealMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
}

/// The rank-4 synthetic preset on its full 201×201 grid.
pub fn synthetic() -> RealMatrix {
    lowrank_synthetic().simulate().expect("preset simulates").signal
}
