//! The random binned codebook simulated in law, for codebooks too large to
//! store.
//!
//! Given the state, the codewords of the message bin are i.i.d. uniform on
//! `T^n_delta(P_U)`, so the encoder fails with probability `(1 - q)^{per_bin}`
//! where `q` is the fraction of typical sequences jointly typical with `s`, and
//! otherwise returns a uniform member of that set. Codewords of other bins are
//! independent of `y`; each lands in `L(y, gamma)` with the probability obtained
//! by summing class sizes over the joint types of `(u, y)` that the decoder
//! accepts. Codewords sharing the transmitted bin are ignored: a trial where the
//! transmitted codeword leaves the list is counted as an error even if another
//! codeword of the right bin remains.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use super::codebook::{channel_input, GpEncoding};
use super::list::{ListDecoder, ListMode};
use super::GpDesign;
use crate::error::{Error, Result};
use crate::prob::{
    compositions, count_compositions, ConstrainedConditionalSampler, JointDistribution, LogFactorial, TypicalSampler,
    TypicalSetParams, MAX_JOINT_TYPES, TYPICALITY_SLACK,
};

type SamplerSlot = Arc<Option<ConstrainedConditionalSampler>>;

pub struct GpEnsemble {
    design: GpDesign,
    joint_su: JointDistribution,
    n: usize,
    bins: f64,
    per_bin: f64,
    delta: f64,
    delta1: f64,
    typical: TypicalSampler,
    lf: LogFactorial,
    encoders: Mutex<HashMap<Vec<usize>, SamplerSlot>>,
    impostors: Mutex<HashMap<Vec<usize>, f64>>,
}

/// Symbol counts of a sequence.
fn counts(seq: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    seq.iter().for_each(|&a| c[a] += 1);
    c
}

impl GpEnsemble {
    pub fn new(design: &GpDesign, n: usize, bins: f64, per_bin: f64, delta: f64, delta1: f64) -> Result<Self> {
        let typical = TypicalSampler::new(&design.p_u(), TypicalSetParams::new(n, delta))?;
        Ok(Self {
            design: design.clone(),
            joint_su: design.joint_su(),
            n,
            bins,
            per_bin,
            delta,
            delta1,
            typical,
            lf: LogFactorial::new(n),
            encoders: Mutex::new(HashMap::new()),
            impostors: Mutex::new(HashMap::new()),
        })
    }

    pub fn bins(&self) -> f64 {
        self.bins
    }

    pub fn per_bin(&self) -> f64 {
        self.per_bin
    }

    /// Natural log of `|T^n_delta(P_U)|`.
    pub fn ln_typical_size(&self) -> f64 {
        self.typical.log_size()
    }

    fn encoder_for(&self, s: &[usize]) -> Result<SamplerSlot> {
        let key = counts(s, self.design.spec.s_size());
        if let Some(slot) = self.encoders.lock().expect("cache lock").get(&key) {
            return Ok(slot.clone());
        }
        let built = match ConstrainedConditionalSampler::for_counts(&key, &self.joint_su, self.delta1, self.delta) {
            Ok(s) => Some(s),
            Err(Error::EmptyTypicalSet { .. }) => None,
            Err(e) => return Err(e),
        };
        let slot = Arc::new(built);
        self.encoders.lock().expect("cache lock").insert(key, slot.clone());
        Ok(slot)
    }

    /// `ln P(no codeword of a bin is jointly typical with s)`.
    pub fn ln_fallback_probability(&self, s: &[usize]) -> Result<f64> {
        Ok(match self.encoder_for(s)?.as_ref() {
            None => 0.0,
            Some(sampler) => {
                let ln_q = (sampler.log_size() - self.typical.log_size()).min(0.0);
                self.per_bin * (-ln_q.exp()).ln_1p()
            }
        })
    }

    /// A uniform member of the set the encoder searches for `s`, as if some
    /// codeword of the bin qualified; `None` if that set is empty.
    pub fn qualifying_codeword<R: Rng + ?Sized>(&self, s: &[usize], rng: &mut R) -> Result<Option<Vec<usize>>> {
        Ok(self.encoder_for(s)?.as_ref().as_ref().map(|sampler| sampler.sample_for(s, rng)))
    }

    /// A uniform typical sequence, used for the fallback codeword.
    pub fn fresh_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.typical.sample(rng)
    }

    pub fn encode<R: Rng + ?Sized>(&self, bin: u64, s: &[usize], rng: &mut R) -> Result<GpEncoding> {
        let slot = self.encoder_for(s)?;
        let ln_fail = match slot.as_ref() {
            None => 0.0,
            Some(sampler) => {
                let ln_q = (sampler.log_size() - self.typical.log_size()).min(0.0);
                self.per_bin * (-ln_q.exp()).ln_1p()
            }
        };
        let fail = ln_fail == 0.0 || rng.random::<f64>().ln() < ln_fail;
        let (u, bin, fallback) = match (fail, slot.as_ref()) {
            (false, Some(sampler)) => (sampler.sample_for(s, rng), bin, false),
            _ => (self.typical.sample(rng), 0, true),
        };
        let x = channel_input(&self.design, &u, s);
        Ok(GpEncoding { u, x, bin, fallback })
    }

    /// Probability that a uniform member of `T^n_delta(P_U)`, independent of
    /// `y`, lands in `L(y, gamma)`.
    pub fn impostor_probability(
        &self,
        y: &[usize],
        decoder: &ListDecoder,
        mode: ListMode,
        genie: Option<&[f64]>,
    ) -> Result<f64> {
        let (nu, ny) = (decoder.u_size(), decoder.y_size());
        let y_counts = counts(y, ny);
        let cacheable = mode == ListMode::Full;
        if cacheable {
            if let Some(&p) = self.impostors.lock().expect("cache lock").get(&y_counts) {
                return Ok(p);
            }
        }
        let n = self.n as f64;
        let pu = decoder.p_u();
        let total: f64 = y_counts.iter().map(|&nb| count_compositions(nb, &vec![(0, nb); nu])).product();
        if total > MAX_JOINT_TYPES as f64 {
            return Err(Error::ProblemTooLarge(format!("{total:.3e} joint types per output; use a smaller |U| or n")));
        }
        let blocks: Vec<Vec<Vec<u32>>> = y_counts.iter().map(|&nb| compositions(nb, &vec![(0, nb); nu])).collect();
        let block_logs: Vec<Vec<f64>> = blocks
            .iter()
            .zip(&y_counts)
            .map(|(comps, &nb)| comps.iter().map(|c| self.lf.multinomial(nb, c.iter().map(|&x| x as usize))).collect())
            .collect();
        let mut digit = vec![0usize; ny];
        let mut t = vec![0.0; nu * ny];
        let mut logs = Vec::new();
        'outer: loop {
            let typical_u = (0..nu).all(|u| {
                let c: u32 = (0..ny).map(|b| blocks[b][digit[b]][u]).sum();
                (c as f64 / n - pu[u]).abs() <= self.delta + TYPICALITY_SLACK
            });
            if typical_u {
                for b in 0..ny {
                    for u in 0..nu {
                        t[u * ny + b] = blocks[b][digit[b]][u] as f64 / n;
                    }
                }
                if decoder.contains(&t, mode, genie)? {
                    logs.push((0..ny).map(|b| block_logs[b][digit[b]]).sum::<f64>());
                }
            }
            for b in (0..ny).rev() {
                digit[b] += 1;
                if digit[b] < blocks[b].len() {
                    continue 'outer;
                }
                digit[b] = 0;
            }
            break;
        }
        let p = if logs.is_empty() {
            0.0
        } else {
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ln = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            (ln - self.typical.log_size()).exp().min(1.0)
        };
        if cacheable {
            self.impostors.lock().expect("cache lock").insert(y_counts, p);
        }
        Ok(p)
    }

    /// Whether some codeword outside the transmitted bin joins the list.
    pub fn impostor_hit<R: Rng + ?Sized>(
        &self,
        y: &[usize],
        decoder: &ListDecoder,
        mode: ListMode,
        genie: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<bool> {
        let others = (self.bins - 1.0) * self.per_bin;
        if others <= 0.0 {
            return Ok(false);
        }
        let p = self.impostor_probability(y, decoder, mode, genie)?;
        // P(at least one of `others` independent trials succeeds)
        let p_any = -(others * (-p).ln_1p()).exp_m1();
        Ok(rng.random::<f64>() < p_any)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp_codec::codebook::{encoder_deviation, DiscreteBinnedCodebook, MEMORY_CAP};
    use crate::gp_codec::fixtures::noisy_stuck_at;
    use crate::gp_codec::list::{joint_type, DEFAULT_LP_TOL};
    use crate::prob::is_typical;
    use crate::stats::wilson95;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
        (0..n)
            .map(|_| {
                let r: f64 = rng.random();
                if r < 0.1 {
                    0
                } else if r < 0.2 {
                    1
                } else {
                    2
                }
            })
            .collect()
    }

    #[test]
    fn encoder_output_meets_both_conditions() {
        let d = noisy_stuck_at(0.2, [0.0, 0.1]);
        let e = GpEnsemble::new(&d, 64, 2f64.powi(8), 2f64.powi(12), 0.2, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let joint = d.joint_su();
        for _ in 0..100 {
            let s = state(64, &mut rng);
            let enc = e.encode(3, &s, &mut rng).unwrap();
            if !enc.fallback {
                assert!(encoder_deviation(&enc.u, &s, &joint) <= 0.1 + 1e-12);
                assert!(is_typical(&enc.u, &d.p_u(), TypicalSetParams::new(64, 0.2)));
                assert_eq!(enc.bin, 3);
            }
        }
    }

    #[test]
    fn fallback_rate_matches_stored_codebooks() {
        let d = noisy_stuck_at(0.2, [0.0, 0.1]);
        let (n, per_bin) = (32, 4.0);
        let (delta, delta1) = (0.25, 0.06);
        let e = GpEnsemble::new(&d, n, 2.0, per_bin, delta, delta1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 1500;
        let (mut explicit, mut implicit) = (0u64, 0u64);
        for t in 0..trials {
            let s = state(n, &mut rng);
            let cb = DiscreteBinnedCodebook::with_counts(&d, n, 2.0, per_bin, delta, t, MEMORY_CAP).unwrap();
            explicit += cb.encode(&d, 1, &s, delta1, &mut rng).fallback as u64;
            implicit += e.encode(1, &s, &mut rng).unwrap().fallback as u64;
        }
        let (lo, hi) = wilson95(explicit, trials);
        let (lo2, hi2) = wilson95(implicit, trials);
        assert!(lo <= hi2 && lo2 <= hi, "{explicit} vs {implicit}");
    }

    #[test]
    fn impostor_probability_matches_monte_carlo() {
        let d = noisy_stuck_at(0.2, [0.0, 0.1]);
        let n = 24;
        let e = GpEnsemble::new(&d, n, 2.0, 1.0, 0.25, 0.5).unwrap();
        let dec = ListDecoder::new(&d.spec, &d.strategy, &d.p_us, 0.12, DEFAULT_LP_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<usize> = (0..n).map(|i| (i % 3 == 0) as usize).collect();
        let p = e.impostor_probability(&y, &dec, ListMode::Full, None).unwrap();
        let trials = 4000u64;
        let hits = (0..trials)
            .filter(|_| {
                let u = e.fresh_codeword(&mut rng);
                dec.contains(&joint_type(&u, &y, 2, 2), ListMode::Full, None).unwrap()
            })
            .count() as u64;
        let (lo, hi) = wilson95(hits, trials);
        assert!(p > 0.0 && lo <= p && p <= hi, "exact {p}, observed {hits}/{trials}");
    }
}
