//! Executable model constructions: the birth-death and M/M/1 fixtures, the
//! halving-map counterexample on `[0, 1]`, the Lindley waiting-time chain,
//! and contractive affine iterated function systems.

mod atomic;
mod counterexample;
mod fixtures;
mod ifs;
mod lindley;

pub use atomic::AtomicMeasure;
pub use counterexample::{
    counterexample_diagonal, counterexample_marginal, counterexample_report, counterexample_step, hitting_step_count,
    CounterexampleReport, DiagonalRow, Level,
};
pub use fixtures::{birth_death_kernel, mm1_generator, two_state_generator, BirthDeath};
pub use ifs::{ifs_backward, ifs_coupled_gap, AffineLaw, IfsGap, IfsSample, IfsSpec, ScalarLaw};
pub use lindley::{
    lindley_coupled_sup_distance, lindley_stationary_sample, CouplingEstimate, IncrementLaw, LindleySpec,
    LindleyStationary,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of independent random streams a Monte-Carlo run is split into.
/// Results depend on `(seed, STREAMS)` only.
pub const STREAMS: u64 = 16;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample counts per stream, summing to `samples`.
pub(crate) fn stream_sizes(samples: usize) -> impl Iterator<Item = (u64, usize)> {
    let k = STREAMS as usize;
    (0..STREAMS).map(move |s| (s, samples / k + usize::from((s as usize) < samples % k)))
}
