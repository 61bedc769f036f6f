//! Seeded random streams.
//!
//! Every episode owns a set of generators derived from `(master_seed, stream)`.
//! Streams are independent ChaCha8 sequences, so changing the learner never
//! perturbs the valuations the adversary draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Named stream identifiers inside one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Adversary = 1,
    Learner = 2,
    Estimator = 3,
    Scenario = 4,
    Feedback = 5,
}

/// Build the generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Generators handed to a learner: one for its own policy randomness, one for
/// the estimation procedure.
#[derive(Debug, Clone)]
pub struct LearnerRngs {
    pub policy: SimRng,
    pub estimator: SimRng,
}

impl LearnerRngs {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            policy: stream_rng(seed, Stream::Learner),
            estimator: stream_rng(seed, Stream::Estimator),
        }
    }
}

/// Mix an episode index into a master seed (splitmix64 finalizer).
pub fn episode_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
