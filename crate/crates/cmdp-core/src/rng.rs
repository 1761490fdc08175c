use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent generator for `(seed, stream)`; streams never overlap.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws an index from a discrete distribution given as weights summing to 1.
///
/// Falls back to the last positive entry when rounding leaves the uniform
/// draw above the cumulative sum.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}
