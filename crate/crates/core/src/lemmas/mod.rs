//! Monte Carlo checks of the concentration results the achievability proofs
//! rely on: spherical caps, the refined Markov lemma and Hoeffding's bound for
//! sampling without replacement.

pub mod hoeffding;
pub mod markov;
pub mod sphere_cap;

use crate::csv_fields;
use crate::report::{quote, CsvRecord};
use crate::rng::{stream, Domain};
use rand_chacha::ChaCha8Rng;

/// One estimated probability next to the bound it is compared with.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRecord {
    pub lemma_id: &'static str,
    /// Parameters of the point as a JSON object.
    pub params: String,
    pub n: usize,
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    pub bound: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CsvRecord for LemmaRecord {
    fn header() -> &'static str {
        "lemma_id,param_json,n,trials,violations,rate,bound,ci_lo,ci_hi"
    }

    fn write_fields(&self, out: &mut String) {
        csv_fields!(
            out,
            self.lemma_id,
            quote(&self.params),
            self.n,
            self.trials,
            self.violations,
            self.rate,
            self.bound,
            self.ci_lo,
            self.ci_hi,
        );
    }
}

/// Trials are run in batches of this size, each on its own stream, so
/// results do not depend on the thread count.
pub const BATCH: u64 = 10_000;

/// Stream for batch `batch` of experiment point `point`.
pub(crate) fn batch_rng(seed: u64, point: u64, batch: u64) -> ChaCha8Rng {
    stream(seed, Domain::Lemma, (point << 32) | batch)
}

/// Sizes of the batches covering `trials`.
pub(crate) fn batches(trials: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..trials.div_ceil(BATCH)).map(move |b| (b, BATCH.min(trials - b * BATCH)))
}
