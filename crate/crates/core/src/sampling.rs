//! Deterministic per-sample random streams, so parallel loops give results
//! independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Independent generator for sample `index` of the study `stream`.
pub fn sample_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Evaluate `f` on `count` samples in parallel; results are in index order.
pub fn par_samples<T, F>(seed: u64, stream: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(&mut sample_rng(seed, stream, i)))
        .collect()
}

/// Maximum, treating NaN as infinite.
pub fn max_abs<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0, |m, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}
