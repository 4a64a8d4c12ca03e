//! Exact-in-law simulation of the random sphere codebook without storing it.
//!
//! For a fixed state, the codewords of the message bin have i.i.d. cosines with
//! `S` following the sphere cosine law, so the encoder either fails (all miss
//! the inner-product window) or picks a codeword whose cosine is the law
//! conditioned on the window and whose component orthogonal to `S` is uniform.
//! Codewords of other bins are independent of everything the output depends on,
//! so the largest of their cosines with `Y` is drawn from the law of a maximum.
//! Codewords sharing the transmitted bin are ignored by the decoder model: a
//! trial is counted as an error as soon as some other-bin codeword beats the
//! transmitted one, which can only overstate the error rate.

use rand::Rng;

use super::codebook::{transmit, DpEncoding};
use super::cosine::SphereCosine;
use super::scheme::DpScheme;
use super::sphere::{dot, norm_sq, sample_sphere};

/// Largest bin count representable as a message label.
pub const MAX_LABEL: f64 = 9.223_372_036_854_776e18;

#[derive(Debug, Clone, Copy)]
pub struct EnsembleCode {
    n: usize,
    bins: f64,
    per_bin: f64,
    scheme: DpScheme,
    law: SphereCosine,
}

impl EnsembleCode {
    /// `bins` and `per_bin` are the (possibly astronomically large) counts.
    pub fn new(n: usize, bins: f64, per_bin: f64, scheme: DpScheme) -> Self {
        Self { n, bins, per_bin, scheme, law: SphereCosine::new(n) }
    }

    pub fn bins(&self) -> f64 {
        self.bins
    }

    pub fn per_bin(&self) -> f64 {
        self.per_bin
    }

    /// Number of distinct bin labels used, capped at `2^63`.
    pub fn labels(&self) -> u64 {
        self.bins.min(MAX_LABEL) as u64
    }

    fn radius(&self) -> f64 {
        (self.n as f64 * self.scheme.p_u).sqrt()
    }

    /// Cosine window `[lo, hi]` that the encoder condition imposes for this state.
    pub fn window(&self, s: &[f64], delta1: f64) -> Option<(f64, f64)> {
        let ns = norm_sq(s).sqrt();
        if ns == 0.0 {
            return None;
        }
        let scale = self.radius() * ns;
        let centre = self.scheme.alpha * ns * ns;
        let slack = self.n as f64 * delta1;
        Some(((centre - slack) / scale, (centre + slack) / scale))
    }

    /// Probability that no codeword of a bin satisfies the encoder condition.
    pub fn ln_fallback_probability(&self, s: &[f64], delta1: f64) -> f64 {
        match self.window(s, delta1) {
            None => f64::NEG_INFINITY,
            Some((lo, hi)) => {
                let ln_q = self.law.ln_window(lo.max(-1.0), hi.min(1.0));
                if ln_q == f64::NEG_INFINITY {
                    0.0
                } else {
                    self.per_bin * (-ln_q.exp()).ln_1p()
                }
            }
        }
    }

    /// Encode into bin `bin` (0-based label).
    pub fn encode<R: Rng + ?Sized>(&self, bin: u64, s: &[f64], delta1: f64, rng: &mut R) -> DpEncoding {
        let radius = self.radius();
        let ln_fail = self.ln_fallback_probability(s, delta1);
        if rng.random::<f64>().ln() < ln_fail {
            let u = sample_sphere(self.n, radius, rng);
            return transmit(u, s, &self.scheme, 0, true);
        }
        let u = match self.window(s, delta1) {
            None => sample_sphere(self.n, radius, rng),
            Some((lo, hi)) => {
                let c = self.law.sample_window(lo, hi, rng);
                let ns = norm_sq(s).sqrt();
                let s_hat: Vec<f64> = s.iter().map(|x| x / ns).collect();
                let mut v = sample_sphere(self.n, 1.0, rng);
                let proj = dot(&v, &s_hat);
                v.iter_mut().zip(&s_hat).for_each(|(a, b)| *a -= proj * b);
                let nv = norm_sq(&v).sqrt();
                let orth = (1.0 - c * c).max(0.0).sqrt();
                s_hat.iter().zip(&v).map(|(a, b)| radius * (c * a + orth * b / nv)).collect()
            }
        };
        transmit(u, s, &self.scheme, bin, false)
    }

    /// Decode given the transmitted codeword `u` from bin `bin`. Returns the
    /// decoded bin label and the largest other-bin cosine, or `None` if `y = 0`.
    pub fn decode<R: Rng + ?Sized>(&self, y: &[f64], u: &[f64], bin: u64, rng: &mut R) -> Option<(u64, f64)> {
        let ny = norm_sq(y).sqrt();
        if ny == 0.0 {
            return None;
        }
        let t = dot(y, u) / (ny * self.radius());
        let impostors = (self.bins - 1.0) * self.per_bin;
        let other = self.law.sample_max(impostors, rng);
        if other <= t {
            return Some((bin, other));
        }
        let labels = self.labels();
        let mut d = rng.random_range(0..labels - 1);
        if d >= bin {
            d += 1;
        }
        Some((d, other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::DpChannelSpec;
    use crate::dp_codec::codebook::{SphereCodebook, MEMORY_CAP};
    use crate::dp_codec::sphere::cosine;
    use crate::stats::ks_two_sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme() -> DpScheme {
        DpScheme::with_default_backoff(DpChannelSpec::new(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn chosen_codeword_satisfies_the_encoder_condition() {
        let sc = scheme();
        let code = EnsembleCode::new(256, 2f64.powi(40), 2f64.powi(30), sc);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d1 = sc.default_delta1();
        for _ in 0..200 {
            let s = sample_sphere(256, 16.0, &mut rng);
            let enc = code.encode(5, &s, d1, &mut rng);
            assert!(!enc.fallback);
            assert!((norm_sq(&enc.u) / (256.0 * sc.p_u) - 1.0).abs() < 1e-9);
            let gap = dot(&enc.u, &s) - sc.alpha * norm_sq(&s);
            assert!(gap.abs() <= 256.0 * d1 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn tiny_bins_fall_back() {
        let sc = scheme();
        let code = EnsembleCode::new(256, 4.0, 1.0, sc);
        let s = sample_sphere(256, 16.0, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(code.ln_fallback_probability(&s, sc.default_delta1()) > -1e-3);
    }

    // The ensemble encoder and decoder reproduce the statistics of an explicit
    // codebook small enough to store.
    #[test]
    fn matches_explicit_codebook_in_law() {
        let sc = DpScheme::with_default_backoff(DpChannelSpec::new(1.0, 1.0, 1.0, 0.1).unwrap()).unwrap();
        let n = 64;
        let d1 = 0.02;
        let ens = EnsembleCode::new(n, 8.0, 64.0, sc);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let (mut fa, mut fb) = (0, 0);
        for t in 0..2000 {
            let s = sample_sphere(n, (0.1 * n as f64).sqrt(), &mut rng);
            let cb = SphereCodebook::generate(n, 3.0 / 64.0, 6.0 / 64.0, sc, t, MEMORY_CAP).unwrap();
            let e = cb.encode(1, &s, d1, &mut rng);
            fa += e.fallback as u32;
            if !e.fallback {
                a.push(cosine(&e.u, &s));
            }
            let e = ens.encode(1, &s, d1, &mut rng);
            fb += e.fallback as u32;
            if !e.fallback {
                b.push(cosine(&e.u, &s));
            }
        }
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.001, "{p}");
        assert!((fa as f64 - fb as f64).abs() < 5.0 * (fa.max(fb) as f64).sqrt() + 5.0, "{fa} {fb}");
    }

    #[test]
    fn single_bin_never_errs() {
        let sc = scheme();
        let code = EnsembleCode::new(64, 1.0, 16.0, sc);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = sample_sphere(64, 1.0, &mut rng);
        let y = sample_sphere(64, 1.0, &mut rng);
        assert_eq!(code.decode(&y, &u, 0, &mut rng).unwrap().0, 0);
        assert!(code.decode(&[0.0; 64], &u, 0, &mut rng).is_none());
    }

    #[test]
    fn wrong_bins_are_spread_over_other_labels() {
        let sc = scheme();
        let code = EnsembleCode::new(64, 4.0, 1e6, sc);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = sample_sphere(64, 1.0, &mut rng);
        let mut seen = [0u32; 4];
        for _ in 0..400 {
            let y = sample_sphere(64, 1.0, &mut rng);
            let (d, _) = code.decode(&y, &u, 2, &mut rng).unwrap();
            seen[d as usize] += 1;
        }
        assert_eq!(seen[2], 0);
        assert!(seen.iter().enumerate().all(|(i, &c)| i == 2 || c > 80));
    }
}
