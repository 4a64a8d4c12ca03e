//! Uniform message permutation shared by encoder and decoder.
//!
//! Messages are labels `1..=M`; `0` is reserved for a decoding error.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Largest message set for which the permutation is stored explicitly.
pub const MAX_EXPLICIT_MESSAGES: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessagePermutation {
    forward: Vec<u64>,
    inverse: Vec<u64>,
}

impl MessagePermutation {
    pub fn identity(messages: u64) -> Result<Self> {
        Self::check(messages)?;
        let forward: Vec<u64> = (1..=messages).collect();
        Ok(Self { inverse: forward.clone(), forward })
    }

    /// Uniformly random permutation of `1..=messages`.
    pub fn sample<R: Rng + ?Sized>(messages: u64, rng: &mut R) -> Result<Self> {
        Self::check(messages)?;
        let mut forward: Vec<u64> = (1..=messages).collect();
        forward.shuffle(rng);
        let mut inverse = vec![0; messages as usize];
        for (i, &f) in forward.iter().enumerate() {
            inverse[(f - 1) as usize] = i as u64 + 1;
        }
        Ok(Self { forward, inverse })
    }

    pub fn from_seed(messages: u64, seed: u64) -> Result<Self> {
        Self::sample(messages, &mut stream(seed, Domain::Shared, u64::MAX))
    }

    fn check(messages: u64) -> Result<()> {
        if messages == 0 || messages > MAX_EXPLICIT_MESSAGES {
            return Err(Error::Domain(format!("cannot tabulate a permutation of {messages} messages")));
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.forward.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `Pi(m)`.
    pub fn forward(&self, m: u64) -> u64 {
        self.forward[(m - 1) as usize]
    }

    /// `Pi^{-1}(m)`; the error label `0` maps to itself.
    pub fn inverse(&self, m: u64) -> u64 {
        if m == 0 {
            0
        } else {
            self.inverse[(m - 1) as usize]
        }
    }
}
