//! Dirty-paper coding against a power-limited, state-aware jammer.

pub mod codebook;
pub mod cosine;
pub mod ensemble;
pub mod scheme;
pub mod simulate;
pub mod sphere;
