//! Shared fixtures for the benchmarks in `benches/`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spw_core::{AtomicMeasure, MuFunction, RandomAtomic};

/// A seeded random measure and test function.
pub fn fixture(seed: u64) -> (AtomicMeasure, MuFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = RandomAtomic::default().sample(&mut rng);
    let f = MuFunction::random(&m, &mut rng);
    (m, f)
}
