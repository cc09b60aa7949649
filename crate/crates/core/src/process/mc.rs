use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

/// Independent random sub-streams within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    /// Positive-side skyline.
    Primary = 0,
    /// Negative-side skyline.
    Mirror = 1,
    /// Aerial node positions.
    Aerial = 2,
    Spare = 3,
}

const LANES: u64 = 4;

/// Generator for one lane of one replication. Distinct `(replication, lane)`
/// pairs map to distinct ChaCha streams under the same master seed.
pub fn replication_rng(master_seed: u64, replication: u64, lane: Lane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication * LANES + lane as u64);
    rng
}

/// Runs `f` for replications `0..n` in parallel and returns the results in
/// replication order, so downstream reductions are thread-count independent.
pub fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..n as u64).into_par_iter().map(&f).collect()
}
