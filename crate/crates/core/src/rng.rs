//! Seed derivation.
//!
//! Every random quantity in a simulation is drawn from a ChaCha stream keyed by
//! `(master seed, domain)` and selected by an index (usually the trial number).
//! Streams for different domains never overlap, so the codebook, the channel
//! and the adversary can be reproduced independently of each other and of the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes that need their own random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Codebook,
    /// Encoder tie-breaking, state, noise.
    Channel,
    /// Message permutation and other per-block shared randomness.
    Shared,
    Adversary,
    Calibration,
    Lemma,
    Solver,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Codebook => 0x636f_6465_626f_6f6b,
            Domain::Channel => 0x6368_616e_6e65_6c00,
            Domain::Shared => 0x7368_6172_6564_0000,
            Domain::Adversary => 0x6164_7665_7273_6172,
            Domain::Calibration => 0x6361_6c69_6272_6174,
            Domain::Lemma => 0x6c65_6d6d_6100_0000,
            Domain::Solver => 0x736f_6c76_6572_0000,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The RNG for `(seed, domain)`, positioned on stream `index`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ domain.tag();
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
