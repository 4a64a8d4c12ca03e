//! Explicit binned sphere codebook, dirty-paper encoder and minimum-angle
//! decoder.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::scheme::DpScheme;
use super::sphere::{dot, norm_sq, sample_sphere};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Default cap on `n * bins * per_bin` stored reals.
pub const MEMORY_CAP: u64 = 1 << 26;

/// `floor(2^{nR})` clamped to at least one, as a float (it may exceed `u64`).
pub fn count_for_rate(n: usize, rate: f64) -> f64 {
    (n as f64 * rate).exp2().floor().max(1.0)
}

/// Output of the dirty-paper encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DpEncoding {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    /// 0-based bin of the chosen codeword.
    pub bin: u64,
    /// No codeword of the message bin met the inner-product condition.
    pub fallback: bool,
    /// `||U - alpha S||^2 > nP`, so the zero vector was sent.
    pub zeroed: bool,
}

/// Form `X = U - alpha S`, or the zero vector if that exceeds the power budget.
pub fn transmit(u: Vec<f64>, s: &[f64], scheme: &DpScheme, bin: u64, fallback: bool) -> DpEncoding {
    let n = u.len();
    let x: Vec<f64> = u.iter().zip(s).map(|(a, b)| a - scheme.alpha * b).collect();
    let zeroed = norm_sq(&x) > n as f64 * scheme.spec.power;
    let x = if zeroed { vec![0.0; n] } else { x };
    DpEncoding { u, x, bin, fallback, zeroed }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereCodebook {
    n: usize,
    bins: usize,
    per_bin: usize,
    scheme: DpScheme,
    words: Vec<f64>,
    seed: u64,
}

impl SphereCodebook {
    /// `floor(2^{nR})` bins of `floor(2^{nR~})` codewords, uniform on the
    /// sphere of radius `sqrt(n P_U)`.
    pub fn generate(n: usize, rate: f64, rate_tilde: f64, scheme: DpScheme, seed: u64, cap: u64) -> Result<Self> {
        Self::with_counts(n, count_for_rate(n, rate), count_for_rate(n, rate_tilde), scheme, seed, cap)
    }

    /// Same, with the bin and per-bin counts given directly.
    pub fn with_counts(n: usize, bins: f64, per_bin: f64, scheme: DpScheme, seed: u64, cap: u64) -> Result<Self> {
        let entries = n as f64 * bins * per_bin;
        if entries > cap as f64 {
            return Err(Error::CodebookTooLarge { entries, cap });
        }
        let (bins, per_bin) = (bins as usize, per_bin as usize);
        let radius = (n as f64 * scheme.p_u).sqrt();
        let mut rng = stream(seed, Domain::Codebook, 0);
        let mut words = Vec::with_capacity(n * bins * per_bin);
        for _ in 0..bins * per_bin {
            words.extend(sample_sphere(n, radius, &mut rng));
        }
        Ok(Self { n, bins, per_bin, scheme, words, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn per_bin(&self) -> usize {
        self.per_bin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> &DpScheme {
        &self.scheme
    }

    /// Realized `(R, R~)` after rounding the counts down.
    pub fn realized_rates(&self) -> (f64, f64) {
        let n = self.n as f64;
        ((self.bins as f64).log2() / n, (self.per_bin as f64).log2() / n)
    }

    /// Codeword `k` of 0-based bin `bin`.
    pub fn word(&self, bin: usize, k: usize) -> &[f64] {
        let i = bin * self.per_bin + k;
        &self.words[i * self.n..(i + 1) * self.n]
    }

    /// Pick uniformly among the codewords of `bin` with
    /// `|<U - alpha S, S>| <= n delta1`; fall back to the first codeword of the
    /// first bin when none qualifies.
    pub fn encode<R: Rng + ?Sized>(&self, bin: usize, s: &[f64], delta1: f64, rng: &mut R) -> DpEncoding {
        let alpha_s2 = self.scheme.alpha * norm_sq(s);
        let slack = self.n as f64 * delta1;
        let ok: Vec<usize> =
            (0..self.per_bin).filter(|&k| (dot(self.word(bin, k), s) - alpha_s2).abs() <= slack).collect();
        match ok.choose(rng) {
            Some(&k) => transmit(self.word(bin, k).to_vec(), s, &self.scheme, bin as u64, false),
            None => transmit(self.word(0, 0).to_vec(), s, &self.scheme, 0, true),
        }
    }

    /// Minimum-angle decoding. Returns the 0-based bin of the codeword with the
    /// largest inner product with `y` (first in (bin, index) order on ties) and
    /// the largest cosine among codewords outside `exclude_bin`. `None` when
    /// `y = 0`.
    pub fn decode(&self, y: &[f64], exclude_bin: Option<usize>) -> Option<(usize, f64)> {
        let ny = norm_sq(y).sqrt();
        if ny == 0.0 {
            return None;
        }
        let mut best = (f64::NEG_INFINITY, 0usize);
        let mut other = f64::NEG_INFINITY;
        for bin in 0..self.bins {
            for k in 0..self.per_bin {
                let d = dot(self.word(bin, k), y);
                if d > best.0 {
                    best = (d, bin);
                }
                if Some(bin) != exclude_bin && d > other {
                    other = d;
                }
            }
        }
        let radius = (self.n as f64 * self.scheme.p_u).sqrt();
        Some((best.1, other / (radius * ny)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::DpChannelSpec;
    use crate::dp_codec::sphere::cosine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme() -> DpScheme {
        DpScheme::with_default_backoff(DpChannelSpec::new(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn codewords_lie_on_the_sphere_and_are_reproducible() {
        let sc = scheme();
        let a = SphereCodebook::generate(32, 0.1, 0.1, sc, 5, MEMORY_CAP).unwrap();
        let b = SphereCodebook::generate(32, 0.1, 0.1, sc, 5, MEMORY_CAP).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.bins(), a.per_bin()), (9, 9));
        for bin in 0..a.bins() {
            for k in 0..a.per_bin() {
                assert!((norm_sq(a.word(bin, k)) / (32.0 * sc.p_u) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn memory_guard() {
        let err = SphereCodebook::generate(512, 0.2, 0.2, scheme(), 0, MEMORY_CAP);
        assert!(matches!(err, Err(Error::CodebookTooLarge { .. })));
    }

    #[test]
    fn zero_state_accepts_every_codeword() {
        // with sigma_S^2 = 0 the codewords have norm^2 n P' < n P
        let sc = DpScheme::with_default_backoff(DpChannelSpec::new(1.0, 1.0, 1.0, 0.0).unwrap()).unwrap();
        let cb = SphereCodebook::generate(16, 0.125, 0.125, sc, 1, MEMORY_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let enc = cb.encode(2, &[0.0; 16], 1e-9, &mut rng);
        assert!(!enc.fallback && !enc.zeroed);
        assert_eq!(enc.bin, 2);
        assert_eq!(enc.x, enc.u);
        assert!(norm_sq(&enc.x) < 16.0 * sc.spec.power);
    }

    #[test]
    fn orthogonal_state_forces_fallback() {
        // S orthogonal to every codeword of bin 1: requires alpha ||S||^2 <= n delta1
        let sc = scheme();
        let n = 8;
        let cb = SphereCodebook::generate(n, 0.125, 0.125, sc, 2, MEMORY_CAP).unwrap();
        let mut s = sample_sphere(n, (n as f64).sqrt(), &mut ChaCha8Rng::seed_from_u64(3));
        for k in 0..cb.per_bin() {
            let w = cb.word(1, k).to_vec();
            // one Gram-Schmidt sweep per codeword, repeated until orthogonal
            for _ in 0..50 {
                let c = dot(&s, &w) / norm_sq(&w);
                s.iter_mut().zip(&w).for_each(|(a, b)| *a -= c * b);
            }
        }
        if cb.per_bin() < n {
            let scale = (n as f64 / norm_sq(&s)).sqrt();
            s.iter_mut().for_each(|x| *x *= scale);
            let enc = cb.encode(1, &s, 0.5 * sc.alpha, &mut ChaCha8Rng::seed_from_u64(0));
            assert!(enc.fallback);
            assert_eq!(enc.u, cb.word(0, 0));
        }
    }

    #[test]
    fn decoding_a_codeword_returns_its_bin() {
        let cb = SphereCodebook::generate(24, 0.1, 0.05, scheme(), 7, MEMORY_CAP).unwrap();
        for bin in 0..cb.bins() {
            let (got, other) = cb.decode(cb.word(bin, 0), Some(bin)).unwrap();
            assert_eq!(got, bin);
            assert!(other < 1.0);
        }
        assert!(cb.decode(&[0.0; 24], None).is_none());
        let w = cb.word(0, 0);
        assert!((cosine(w, w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transmitted_power_never_exceeds_budget() {
        let sc = scheme();
        let cb = SphereCodebook::generate(32, 0.1, 0.2, sc, 9, MEMORY_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..500 {
            let s = sample_sphere(32, 3.0 + (t % 5) as f64, &mut rng);
            let enc = cb.encode(t % cb.bins(), &s, 0.05, &mut rng);
            assert!(norm_sq(&enc.x) <= 32.0 * sc.spec.power);
        }
    }
}
