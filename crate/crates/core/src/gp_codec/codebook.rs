//! Binned codebook of uniform typical sequences and the typicality encoder.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::list::{joint_type, ListDecoder, ListMode};
use super::GpDesign;
use crate::error::{Error, Result};
use crate::prob::{JointDistribution, TypicalSampler, TypicalSetParams, TYPICALITY_SLACK};
use crate::rng::{stream, Domain};

/// Default cap on `n * bins * per_bin` stored symbols.
pub const MEMORY_CAP: u64 = 1 << 26;

/// `floor(2^{nR})`, at least one.
pub fn count_for_rate(n: usize, rate: f64) -> f64 {
    (n as f64 * rate).exp2().floor().max(1.0)
}

/// `||T_{u,s} - P_{S,U}||_inf` with `P_{S,U}` indexed `s * |U| + u`.
pub fn encoder_deviation(u: &[usize], s: &[usize], joint_su: &JointDistribution) -> f64 {
    let nu = joint_su.cols();
    let mut counts = vec![0usize; joint_su.rows() * nu];
    for (&a, &b) in u.iter().zip(s) {
        counts[b * nu + a] += 1;
    }
    let n = u.len() as f64;
    counts.iter().zip(joint_su.mass()).map(|(&c, &p)| (c as f64 / n - p).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpEncoding {
    pub u: Vec<usize>,
    pub x: Vec<usize>,
    /// 0-based bin of the chosen codeword.
    pub bin: u64,
    pub fallback: bool,
}

/// Input sequence `x_i = x(u_i, s_i)`.
pub fn channel_input(design: &GpDesign, u: &[usize], s: &[usize]) -> Vec<usize> {
    design.strategy.map(u, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBinnedCodebook {
    n: usize,
    bins: usize,
    per_bin: usize,
    delta: f64,
    seed: u64,
    words: Vec<u8>,
}

impl DiscreteBinnedCodebook {
    /// `floor(2^{nR})` bins of `floor(2^{nR~})` codewords drawn i.i.d.
    /// uniformly from `T^n_delta(P_U)`.
    pub fn generate(
        design: &GpDesign,
        n: usize,
        rate: f64,
        rate_tilde: f64,
        delta: f64,
        seed: u64,
        cap: u64,
    ) -> Result<Self> {
        Self::with_counts(design, n, count_for_rate(n, rate), count_for_rate(n, rate_tilde), delta, seed, cap)
    }

    pub fn with_counts(
        design: &GpDesign,
        n: usize,
        bins: f64,
        per_bin: f64,
        delta: f64,
        seed: u64,
        cap: u64,
    ) -> Result<Self> {
        let entries = n as f64 * bins * per_bin;
        if entries > cap as f64 {
            return Err(Error::CodebookTooLarge { entries, cap });
        }
        let sampler = TypicalSampler::new(&design.p_u(), TypicalSetParams::new(n, delta))?;
        let (bins, per_bin) = (bins as usize, per_bin as usize);
        let mut rng = stream(seed, Domain::Codebook, 0);
        let mut words = Vec::with_capacity(n * bins * per_bin);
        for _ in 0..bins * per_bin {
            words.extend(sampler.sample(&mut rng).into_iter().map(|u| u as u8));
        }
        Ok(Self { n, bins, per_bin, delta, seed, words })
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

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realized_rates(&self) -> (f64, f64) {
        let n = self.n as f64;
        ((self.bins as f64).log2() / n, (self.per_bin as f64).log2() / n)
    }

    pub fn word(&self, bin: usize, k: usize) -> Vec<usize> {
        let i = bin * self.per_bin + k;
        self.words[i * self.n..(i + 1) * self.n].iter().map(|&u| u as usize).collect()
    }

    /// Uniform choice among the codewords of `bin` jointly typical with `s`
    /// at radius `delta1`; the first codeword of the first bin otherwise.
    pub fn encode<R: Rng + ?Sized>(
        &self,
        design: &GpDesign,
        bin: usize,
        s: &[usize],
        delta1: f64,
        rng: &mut R,
    ) -> GpEncoding {
        let joint = design.joint_su();
        let ok: Vec<usize> = (0..self.per_bin)
            .filter(|&k| encoder_deviation(&self.word(bin, k), s, &joint) <= delta1 + TYPICALITY_SLACK)
            .collect();
        let (u, bin, fallback) = match ok.choose(rng) {
            Some(&k) => (self.word(bin, k), bin as u64, false),
            None => (self.word(0, 0), 0, true),
        };
        let x = channel_input(design, &u, s);
        GpEncoding { u, x, bin, fallback }
    }

    /// All `(bin, index)` pairs in `L(y, gamma)`.
    pub fn list(
        &self,
        y: &[usize],
        decoder: &ListDecoder,
        mode: ListMode,
        genie: Option<&[f64]>,
    ) -> Result<Vec<(usize, usize)>> {
        let mut cache = std::collections::HashMap::new();
        let mut out = Vec::new();
        let (nu, ny) = (decoder.u_size(), decoder.y_size());
        for bin in 0..self.bins {
            for k in 0..self.per_bin {
                let t = joint_type(&self.word(bin, k), y, nu, ny);
                let key: Vec<u64> = t.iter().map(|x| (x * self.n as f64).round() as u64).collect();
                let member = match cache.get(&key) {
                    Some(&m) => m,
                    None => {
                        let m = decoder.contains(&t, mode, genie)?;
                        cache.insert(key, m);
                        m
                    }
                };
                if member {
                    out.push((bin, k));
                }
            }
        }
        Ok(out)
    }
}

/// Common bin of a list, `None` if the list is empty or mixes bins.
pub fn common_bin(list: &[(usize, usize)]) -> Option<usize> {
    let first = list.first()?.0;
    list.iter().all(|&(b, _)| b == first).then_some(first)
}
