//! Reproducible random streams.
//!
//! Every random task (one sequence at one length, one bootstrap replicate,
//! one chain instance) draws from its own ChaCha stream selected by a key
//! derived from the task coordinates. Results are therefore independent of
//! scheduling and thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for task `key` under top-level `seed`.
pub fn stream(seed: u64, key: &[u64]) -> ChaCha8Rng {
    let id = key
        .iter()
        .fold(0x9e37_79b9_7f4a_7c15_u64, |acc, &k| mix(acc ^ mix(k.wrapping_add(0x632b_e59b_d9b4_e019))));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draws `n` trials over `probs` (need not be exactly normalised; the last
/// category absorbs the remainder).
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass_left: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q <= 0.0 {
            0
        } else if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).expect("probability in (0,1)").sample(rng)
        };
        counts[i] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    counts
}
