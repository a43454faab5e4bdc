//! Counter-based random substreams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 generator keyed by
//! the root seed. The 64-bit ChaCha stream id is derived from a label path
//! (purpose tag, grid index, repetition index, ...) with SplitMix64, so each
//! (purpose, grid point, repetition) gets its own stream no matter in which
//! order or on which thread it is evaluated. Within a round stream, round `i`
//! owns the word range starting at `i * WORDS_PER_ROUND`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// 32-bit words consumed by one protocol round: eight `u64` draws.
pub const WORDS_PER_ROUND: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Rounds = 1,
    Shuffle = 2,
    Hash = 3,
    Verify = 4,
    ErrorChannel = 5,
    BitSource = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a label path.
pub fn stream_id(purpose: Purpose, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(purpose as u64), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Generator for the substream `(purpose, labels...)` under `root_seed`.
pub fn substream(root_seed: u64, purpose: Purpose, labels: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(stream_id(purpose, labels));
    rng
}

/// Generator positioned at the start of round `round` (0-based) of a round stream.
pub fn round_rng(root_seed: u64, labels: &[u64], round: usize) -> StreamRng {
    let mut rng = substream(root_seed, Purpose::Rounds, labels);
    rng.set_word_pos(round as u128 * WORDS_PER_ROUND);
    rng
}
