//! Tail of the sample mean when drawing without replacement, against
//! `exp(-2 m t^2)` for a sample of size `m`.

use rand::seq::index;
use rayon::prelude::*;
use serde_json::json;

use super::{batch_rng, batches, LemmaRecord};
use crate::error::{Error, Result};
use crate::stats::wilson95;

/// A population of `population` items, `ones` of which are marked, and a
/// sample of `sample` items drawn without replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Urn {
    pub population: usize,
    pub ones: usize,
    pub sample: usize,
}

impl Urn {
    pub fn new(population: usize, ones: usize, sample: usize) -> Result<Self> {
        if ones > population || sample == 0 || sample > population {
            return Err(Error::Domain(format!(
                "need ones <= population and 0 < sample <= population, got {ones}, {population}, {sample}"
            )));
        }
        Ok(Self { population, ones, sample })
    }

    /// Urn for a type cell of size at least `n delta` (`scale = 1`) or
    /// `n delta / 4` (`scale = 1/4`).
    pub fn for_cell(population: usize, ones: usize, n: usize, delta: f64, scale: f64) -> Result<Self> {
        let sample = (scale * n as f64 * delta).ceil() as usize;
        Self::new(population, ones, sample)
    }

    pub fn mean(&self) -> f64 {
        self.ones as f64 / self.population as f64
    }

    pub fn bound(&self, t: f64) -> f64 {
        (-2.0 * self.sample as f64 * t * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub urn: Urn,
    pub t: f64,
    pub trials: u64,
    pub exceed: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: f64,
}

impl TailEstimate {
    pub fn record(&self, n: usize) -> LemmaRecord {
        LemmaRecord {
            lemma_id: "hoeffding_wor",
            params: json!({
                "population": self.urn.population,
                "ones": self.urn.ones,
                "sample": self.urn.sample,
                "t": self.t,
            })
            .to_string(),
            n,
            trials: self.trials,
            violations: self.exceed,
            rate: self.rate,
            bound: self.bound,
            ci_lo: self.ci_lo,
            ci_hi: self.ci_hi,
        }
    }
}

/// Frequency of `(marked in sample)/sample - ones/population >= t`.
pub fn hoeffding_wor_tail(urn: Urn, t: f64, trials: u64, seed: u64, point: u64) -> Result<TailEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let threshold = urn.mean() + t;
    let exceed: u64 = batches(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = batch_rng(seed, point, b);
            (0..size)
                .filter(|_| {
                    // the first `ones` items are the marked ones
                    let marked =
                        index::sample(&mut rng, urn.population, urn.sample).iter().filter(|&i| i < urn.ones).count();
                    marked as f64 / urn.sample as f64 >= threshold - 1e-12
                })
                .count() as u64
        })
        .sum();
    let (ci_lo, ci_hi) = wilson95(exceed, trials);
    Ok(TailEstimate { urn, t, trials, exceed, rate: exceed as f64 / trials as f64, ci_lo, ci_hi, bound: urn.bound(t) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_bound() {
        let urn = Urn::for_cell(400, 120, 1000, 0.1, 1.0).unwrap();
        assert_eq!(urn.sample, 100);
        assert!((urn.bound(0.1) - (-2f64).exp()).abs() < 1e-15);
        // quarter cell: exp(-(n/2) delta t^2)
        let q = Urn::for_cell(400, 120, 1000, 0.1, 0.25).unwrap();
        assert!((q.bound(0.1) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn impossible_deviation_never_happens() {
        let urn = Urn::new(400, 120, 100).unwrap();
        let e = hoeffding_wor_tail(urn, 1.5, 20_000, 1, 0).unwrap();
        assert_eq!(e.exceed, 0);
        assert!(e.bound > 0.0);
    }

    #[test]
    fn tail_below_bound_and_decreasing() {
        let urn = Urn::new(400, 120, 100).unwrap();
        let tails: Vec<TailEstimate> = [0.02, 0.05, 0.1, 0.15]
            .iter()
            .enumerate()
            .map(|(i, &t)| hoeffding_wor_tail(urn, t, 50_000, 3, i as u64).unwrap())
            .collect();
        for e in &tails {
            assert!(e.rate <= e.bound, "{e:?}");
        }
        assert!(tails.windows(2).all(|w| w[1].rate <= w[0].rate));
    }

    #[test]
    fn full_population_has_no_spread() {
        let urn = Urn::new(50, 20, 50).unwrap();
        assert_eq!(hoeffding_wor_tail(urn, 0.01, 1000, 0, 0).unwrap().exceed, 0);
    }
}
