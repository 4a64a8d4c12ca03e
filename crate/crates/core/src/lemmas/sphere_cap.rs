//! Probability that a uniform point on the unit sphere of `R^n` falls in the
//! cap `<r, R> >= gamma`, against the closed-form upper and lower bounds.

use rayon::prelude::*;
use serde_json::json;

use super::{batch_rng, batches, LemmaRecord};
use crate::dp_codec::cosine::SphereCosine;
use crate::dp_codec::sphere::{dot, sample_sphere};
use crate::error::{Error, Result};
use crate::stats::wilson95;

/// `2^{((n-1)/2) log2(1 - gamma^2)}`, valid for `1/sqrt(2 pi n) < gamma < 1`.
pub fn cap_upper(gamma: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if !(gamma > 1.0 / (2.0 * std::f64::consts::PI * nf).sqrt() && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "upper cap bound needs 1/sqrt(2 pi n) < gamma < 1, got gamma = {gamma}, n = {n}"
        )));
    }
    Ok(((nf - 1.0) / 2.0 * (1.0 - gamma * gamma).log2()).exp2())
}

/// The correction `f(n)` in the lower bound; defined when `n gamma^2 > 1 - gamma^2`.
pub fn lower_correction(gamma: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    let g2 = gamma * gamma;
    if !(gamma > 0.0 && gamma < 1.0) || nf * g2 <= 1.0 - g2 {
        return Err(Error::Domain(format!(
            "lower cap bound needs 0 < gamma < 1 and n gamma^2 > 1 - gamma^2, got gamma = {gamma}, n = {n}"
        )));
    }
    let ratio = nf * g2 / (nf * g2 - (1.0 - g2));
    Ok((2.0 * std::f64::consts::PI * nf * g2 * (1.0 - g2) * ratio * ratio).log2() / (2.0 * nf))
}

/// `2^{-n (1/2 log2(1/(1 - gamma^2)) + f(n))}`.
pub fn cap_lower(gamma: f64, n: usize) -> Result<f64> {
    let f = lower_correction(gamma, n)?;
    Ok((-(n as f64) * (0.5 * (1.0 / (1.0 - gamma * gamma)).log2() + f)).exp2())
}

/// Both bounds, `(upper, lower)`.
pub fn sphere_cap_bounds(gamma: f64, n: usize) -> Result<(f64, f64)> {
    Ok((cap_upper(gamma, n)?, cap_lower(gamma, n)?))
}

/// First `n <= n_max` with `f(n) >= 0`; `f` is negative before it and
/// nonnegative after it.
pub fn lower_threshold(gamma: f64, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| lower_correction(gamma, n).is_ok_and(|f| f >= 0.0))
}

/// Exact `P(<r, R> >= gamma)` from the cosine law.
pub fn cap_exact(gamma: f64, n: usize) -> f64 {
    SphereCosine::new(n).ln_tail(gamma).exp()
}

/// Fixed reference direction for the Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// First coordinate axis.
    Axis,
    /// `(1, ..., 1) / sqrt(n)`.
    Diagonal,
}

impl Direction {
    fn vector(self, n: usize) -> Vec<f64> {
        match self {
            Direction::Axis => {
                let mut v = vec![0.0; n];
                v[0] = 1.0;
                v
            }
            Direction::Diagonal => vec![1.0 / (n as f64).sqrt(); n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapEstimate {
    pub gamma: f64,
    pub n: usize,
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub upper: f64,
    pub lower: f64,
}

impl CapEstimate {
    /// `lower - w <= rate <= upper + w` with `w` the interval width.
    pub fn within_bounds(&self) -> bool {
        let w = self.ci_hi - self.ci_lo;
        self.rate >= self.lower - w && self.rate <= self.upper + w
    }

    pub fn record(&self) -> LemmaRecord {
        LemmaRecord {
            lemma_id: "sphere_cap",
            params: json!({ "gamma": self.gamma, "lower": self.lower }).to_string(),
            n: self.n,
            trials: self.trials,
            violations: self.hits,
            rate: self.rate,
            bound: self.upper,
            ci_lo: self.ci_lo,
            ci_hi: self.ci_hi,
        }
    }
}

/// Monte Carlo estimate of the cap probability with uniform points drawn by
/// normalizing Gaussian vectors. `point` selects the random streams.
pub fn sphere_cap_montecarlo(
    gamma: f64,
    n: usize,
    trials: u64,
    direction: Direction,
    seed: u64,
    point: u64,
) -> Result<CapEstimate> {
    let (upper, lower) = sphere_cap_bounds(gamma, n)?;
    let r = direction.vector(n);
    let hits: u64 = batches(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = batch_rng(seed, point, b);
            (0..size).filter(|_| dot(&sample_sphere(n, 1.0, &mut rng), &r) >= gamma).count() as u64
        })
        .sum();
    let (ci_lo, ci_hi) = wilson95(hits, trials);
    Ok(CapEstimate { gamma, n, trials, hits, rate: hits as f64 / trials as f64, ci_lo, ci_hi, upper, lower })
}
