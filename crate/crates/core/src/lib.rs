//! Simulation toolkit for arbitrarily varying channels with state known at the
//! encoder: capacity solvers, random-coding simulators for the discrete and
//! Gaussian settings, jammer models and Monte Carlo checks of the supporting
//! concentration lemmas.

// NaN-rejecting `!(x > 0.0)` checks and index loops over parallel tables are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adversary;
pub mod capacity;
pub mod dp_codec;
pub mod error;
pub mod experiment;
pub mod gp_codec;
pub mod lemmas;
pub mod lp;
pub mod permutation;
pub mod prob;
pub mod report;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
