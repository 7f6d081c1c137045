//! Seeded sampling. Every random draw in the crate goes through a
//! `ChaCha8Rng` built here, so runs are reproducible from one seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::PhaseState;
use crate::models::{chart_dim, SystemSpec};
use crate::skewalg::{so_dim, SkewMatrix};

pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for worker `k` of a batch.
pub fn substream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k + 1);
    r
}

pub fn uniform_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_skew(rng: &mut impl Rng, n: usize) -> SkewMatrix {
    SkewMatrix::from_upper(n, &uniform_vec(rng, so_dim(n))).expect("length matches")
}

/// Generic state, entries uniform in [−1, 1].
pub fn random_state(rng: &mut impl Rng, n: usize) -> PhaseState {
    PhaseState { m: random_skew(rng, n), gamma: random_skew(rng, n), t: 0.0 }
}

/// Generic state on the invariant manifold of `spec`.
pub fn compliant_state(rng: &mut impl Rng, spec: &SystemSpec) -> PhaseState {
    let mut s = random_state(rng, spec.n);
    spec.impose_relations(&mut s);
    s
}

/// Random chart point (length `chart_dim(n)`).
pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    uniform_vec(rng, chart_dim(n))
}
