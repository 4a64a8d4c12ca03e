//! Jamming strategies.
//!
//! A jammer sees the message, the whole state sequence and the public code
//! parameters, and draws its own randomness from an [`AdversaryRng`]. It never
//! receives the codebook or the shared randomness: the traits below have no
//! argument through which either could be passed, and [`AdversaryRng`] can only
//! be built from the adversary seed.

mod discrete;
mod gaussian;
mod parse;

pub use discrete::{ConstantJammer, DiscreteJammer, MemorylessJammer, MessageAwareDiscrete};
pub use gaussian::{
    check_power, GaussianIidTruncated, GaussianJammer, MessageAwareGaussian, RandomDirection, StateCancelling,
    ZeroJammer, POWER_SLACK,
};
pub use parse::{parse_discrete, parse_gaussian};

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::rng::{stream, Domain};

/// What a strategy declares it uses. The simulators hide undeclared inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Knowledge {
    pub message: bool,
    pub state: bool,
    pub code_params: bool,
}

impl Knowledge {
    pub const NONE: Knowledge = Knowledge { message: false, state: false, code_params: false };
    pub const STATE: Knowledge = Knowledge { message: false, state: true, code_params: false };
}

/// Public description of the code ensemble: everything the adversary may know.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PublicCodeParams {
    pub n: usize,
    pub rate: f64,
    pub rate_tilde: f64,
    pub messages: u64,
}

/// Adversary-private randomness, derived from `(adversary seed, trial)` only.
#[derive(Debug, Clone)]
pub struct AdversaryRng(ChaCha8Rng);

impl AdversaryRng {
    pub fn new(adversary_seed: u64, trial: u64) -> Self {
        Self(stream(adversary_seed, Domain::Adversary, trial))
    }
}

impl RngCore for AdversaryRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Deterministic per-message perturbation used by message-aware strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageMap {
    Identity,
    /// Keyed hash of `(salt, message, position)`.
    Hashed {
        salt: u64,
    },
}

impl MessageMap {
    /// 64 pseudo-random bits for `(message, index)`.
    pub fn bits(&self, message: u64, index: u64) -> Option<u64> {
        match *self {
            MessageMap::Identity => None,
            MessageMap::Hashed { salt } => {
                let mut z = salt ^ message.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.rotate_left(32);
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                Some(z ^ (z >> 31))
            }
        }
    }
}
