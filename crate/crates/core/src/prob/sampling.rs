//! Exact uniform samplers over typical sets.
//!
//! A typical set is a union of type classes, so a uniform member is obtained by
//! picking a type with probability proportional to its class size and then a
//! uniformly random arrangement of that type.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::seq::SliceRandom;
use rand::Rng;

use super::dist::{Distribution, JointDistribution};
use super::types::{compositions, count_compositions, count_range, LogFactorial, TypicalSetParams};
use crate::error::{Error, Result};

fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

fn weighted_index(logs: &[f64]) -> WeightedIndex<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    WeightedIndex::new(logs.iter().map(|l| (l - max).exp())).expect("nonempty finite weights")
}

fn arrange<R: Rng + ?Sized>(counts: &[u32], rng: &mut R) -> Vec<usize> {
    let mut seq: Vec<usize> =
        counts.iter().enumerate().flat_map(|(sym, &c)| std::iter::repeat_n(sym, c as usize)).collect();
    seq.shuffle(rng);
    seq
}

/// Uniform sampler over `T^n_delta(p)`.
#[derive(Debug, Clone)]
pub struct TypicalSampler {
    n: usize,
    types: Vec<Vec<u32>>,
    log_sizes: Vec<f64>,
    index: WeightedIndex<f64>,
    log_size: f64,
}

impl TypicalSampler {
    pub fn new(p: &Distribution, params: TypicalSetParams) -> Result<Self> {
        let n = params.n;
        let empty = || Error::EmptyTypicalSet { n, delta: params.delta };
        let ranges =
            p.mass().iter().map(|&m| count_range(m, n, params.delta)).collect::<Option<Vec<_>>>().ok_or_else(empty)?;
        let count = count_compositions(n, &ranges);
        if count > MAX_JOINT_TYPES as f64 {
            return Err(Error::ProblemTooLarge(format!(
                "{count:.3e} types in the typical set; reduce n, delta or the alphabet"
            )));
        }
        let types = compositions(n, &ranges);
        if types.is_empty() {
            return Err(empty());
        }
        let lf = LogFactorial::new(n);
        let log_sizes: Vec<f64> = types.iter().map(|c| lf.multinomial(n, c.iter().map(|&x| x as usize))).collect();
        let index = weighted_index(&log_sizes);
        let log_size = log_sum_exp(&log_sizes);
        Ok(Self { n, types, log_sizes, index, log_size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Qualifying types (symbol counts), lexicographic.
    pub fn types(&self) -> &[Vec<u32>] {
        &self.types
    }

    /// Natural log of each type-class size, aligned with [`Self::types`].
    pub fn log_class_sizes(&self) -> &[f64] {
        &self.log_sizes
    }

    /// Natural log of `|T^n_delta(p)|`.
    pub fn log_size(&self) -> f64 {
        self.log_size
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let t = self.index.sample(rng);
        arrange(&self.types[t], rng)
    }
}

/// Draw one sequence uniformly from `T^n_delta(p)`.
pub fn sample_uniform_typical<R: Rng + ?Sized>(
    p: &Distribution,
    params: TypicalSetParams,
    rng: &mut R,
) -> Result<Vec<usize>> {
    Ok(TypicalSampler::new(p, params)?.sample(rng))
}

/// Per-symbol candidate count vectors for `z` at the positions where `y = b`.
fn conditional_candidates(
    y_counts: &[usize],
    joint: &JointDistribution,
    n: usize,
    delta: f64,
) -> Result<Option<Vec<Vec<Vec<u32>>>>> {
    let kz = joint.cols();
    let mut out = Vec::with_capacity(y_counts.len());
    for (b, &nb) in y_counts.iter().enumerate() {
        let ranges = (0..kz)
            .map(|z| count_range(joint.get(b, z), n, delta).map(|(lo, hi)| (lo, hi.min(nb))))
            .collect::<Option<Vec<_>>>();
        let Some(ranges) = ranges else { return Ok(None) };
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return Ok(None);
        }
        let count = count_compositions(nb, &ranges);
        if count > MAX_JOINT_TYPES as f64 {
            return Err(Error::ProblemTooLarge(format!("{count:.3e} conditional types to enumerate")));
        }
        let comps = compositions(nb, &ranges);
        if comps.is_empty() {
            return Ok(None);
        }
        out.push(comps);
    }
    Ok(Some(out))
}

fn positions_by_symbol(y: &[usize], ky: usize) -> Vec<Vec<usize>> {
    let mut pos = vec![Vec::new(); ky];
    for (i, &b) in y.iter().enumerate() {
        pos[b].push(i);
    }
    pos
}

fn fill<R: Rng + ?Sized>(positions: &[Vec<usize>], chosen: &[&[u32]], n: usize, rng: &mut R) -> Vec<usize> {
    let mut z = vec![0; n];
    for (pos, counts) in positions.iter().zip(chosen) {
        let block = arrange(counts, rng);
        for (&i, s) in pos.iter().zip(block) {
            z[i] = s;
        }
    }
    z
}

/// Uniform sampler over `T^n_delta(P_{Y,Z} | y)`.
///
/// The constraint only involves the joint counts `N(b, z)`, so it factorizes
/// over the symbols of `y`: the counts for each `b` are drawn independently
/// with weight equal to the number of arrangements, then the `z` components at
/// the positions where `y = b` are placed by a uniform random permutation.
#[derive(Debug, Clone)]
pub struct ConditionalTypeSampler {
    n: usize,
    positions: Vec<Vec<usize>>,
    candidates: Vec<Vec<Vec<u32>>>,
    indices: Vec<WeightedIndex<f64>>,
}

impl ConditionalTypeSampler {
    pub fn new(y: &[usize], joint: &JointDistribution, delta: f64) -> Result<Self> {
        let n = y.len();
        let positions = positions_by_symbol(y, joint.rows());
        let y_counts: Vec<usize> = positions.iter().map(Vec::len).collect();
        let candidates =
            conditional_candidates(&y_counts, joint, n, delta)?.ok_or(Error::EmptyTypicalSet { n, delta })?;
        let lf = LogFactorial::new(n);
        let indices = candidates
            .iter()
            .zip(&y_counts)
            .map(|(comps, &nb)| {
                let logs: Vec<f64> = comps.iter().map(|c| lf.multinomial(nb, c.iter().map(|&x| x as usize))).collect();
                weighted_index(&logs)
            })
            .collect();
        Ok(Self { n, positions, candidates, indices })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let chosen: Vec<&[u32]> =
            self.candidates.iter().zip(&self.indices).map(|(comps, idx)| comps[idx.sample(rng)].as_slice()).collect();
        fill(&self.positions, &chosen, self.n, rng)
    }
}

/// Draw `Z` uniformly from `T^n_delta(P_{Y,Z} | y)`.
pub fn sample_conditional_type<R: Rng + ?Sized>(
    y: &[usize],
    joint: &JointDistribution,
    params: TypicalSetParams,
    rng: &mut R,
) -> Result<Vec<usize>> {
    Ok(ConditionalTypeSampler::new(y, joint, params.delta)?.sample(rng))
}

/// Uniform sampler over `{z : ||T_z - P_Z|| <= marginal_delta,
/// ||T_{y,z} - P_{Y,Z}|| <= joint_delta}`.
///
/// The marginal condition couples the per-symbol blocks, so joint conditional
/// types are enumerated explicitly. This is the law of the codeword a
/// typicality encoder selects from a uniformly drawn typical codebook.
#[derive(Debug, Clone)]
pub struct ConstrainedConditionalSampler {
    n: usize,
    positions: Vec<Vec<usize>>,
    candidates: Vec<Vec<Vec<u32>>>,
    combos: Vec<Vec<u32>>,
    index: WeightedIndex<f64>,
    log_size: f64,
}

/// Enumeration cap for [`ConstrainedConditionalSampler`].
pub const MAX_JOINT_TYPES: usize = 4_000_000;

impl ConstrainedConditionalSampler {
    pub fn new(y: &[usize], joint: &JointDistribution, joint_delta: f64, marginal_delta: f64) -> Result<Self> {
        let positions = positions_by_symbol(y, joint.rows());
        let y_counts: Vec<usize> = positions.iter().map(Vec::len).collect();
        let mut sampler = Self::for_counts(&y_counts, joint, joint_delta, marginal_delta)?;
        sampler.positions = positions;
        Ok(sampler)
    }

    /// Type-level part only, shared by every `y` with these symbol counts;
    /// draw with [`Self::sample_for`].
    pub fn for_counts(
        y_counts: &[usize],
        joint: &JointDistribution,
        joint_delta: f64,
        marginal_delta: f64,
    ) -> Result<Self> {
        let n: usize = y_counts.iter().sum();
        let kz = joint.cols();
        let empty = || Error::EmptyTypicalSet { n, delta: joint_delta.min(marginal_delta) };
        let positions = Vec::new();
        let y_counts = y_counts.to_vec();
        let candidates = conditional_candidates(&y_counts, joint, n, joint_delta)?.ok_or_else(empty)?;
        let total: f64 = candidates.iter().map(|c| c.len() as f64).product();
        if total > MAX_JOINT_TYPES as f64 {
            return Err(Error::ProblemTooLarge(format!("{total:.3e} conditional types to enumerate")));
        }
        let pz = joint.marginal_b();
        let z_ranges =
            pz.iter().map(|&m| count_range(m, n, marginal_delta)).collect::<Option<Vec<_>>>().ok_or_else(empty)?;
        let lf = LogFactorial::new(n);
        let block_logs: Vec<Vec<f64>> = candidates
            .iter()
            .zip(&y_counts)
            .map(|(comps, &nb)| comps.iter().map(|c| lf.multinomial(nb, c.iter().map(|&x| x as usize))).collect())
            .collect();

        let mut combos = Vec::new();
        let mut logs = Vec::new();
        let mut digit = vec![0usize; candidates.len()];
        let mut marginal = vec![0u32; kz];
        'outer: loop {
            marginal.iter_mut().for_each(|m| *m = 0);
            for (b, &d) in digit.iter().enumerate() {
                for (m, c) in marginal.iter_mut().zip(&candidates[b][d]) {
                    *m += c;
                }
            }
            if marginal.iter().zip(&z_ranges).all(|(&m, &(lo, hi))| (lo..=hi).contains(&(m as usize))) {
                combos.push(digit.iter().map(|&d| d as u32).collect());
                logs.push(digit.iter().enumerate().map(|(b, &d)| block_logs[b][d]).sum());
            }
            for b in (0..digit.len()).rev() {
                digit[b] += 1;
                if digit[b] < candidates[b].len() {
                    continue 'outer;
                }
                digit[b] = 0;
            }
            break;
        }
        if combos.is_empty() {
            return Err(empty());
        }
        let index = weighted_index(&logs);
        let log_size = log_sum_exp(&logs);
        Ok(Self { n, positions, candidates, combos, index, log_size })
    }

    /// Natural log of the number of qualifying sequences.
    pub fn log_size(&self) -> f64 {
        self.log_size
    }

    /// Draw for the `y` given at construction.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        assert!(!self.positions.is_empty(), "sampler built from counts: use sample_for");
        self.draw(&self.positions, rng)
    }

    /// Draw for any `y` with the symbol counts this sampler was built for.
    pub fn sample_for<R: Rng + ?Sized>(&self, y: &[usize], rng: &mut R) -> Vec<usize> {
        let positions = positions_by_symbol(y, self.candidates.len());
        assert_eq!(y.len(), self.n, "sequence length");
        self.draw(&positions, rng)
    }

    fn draw<R: Rng + ?Sized>(&self, positions: &[Vec<usize>], rng: &mut R) -> Vec<usize> {
        let combo = &self.combos[self.index.sample(rng)];
        let chosen: Vec<&[u32]> =
            combo.iter().enumerate().map(|(b, &d)| self.candidates[b][d as usize].as_slice()).collect();
        fill(positions, &chosen, self.n, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::types::{is_jointly_typical, is_typical, EmpiricalType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_radius_gives_balanced_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Distribution::uniform(2);
        let params = TypicalSetParams::new(10, 0.0);
        for _ in 0..100 {
            let x = sample_uniform_typical(&p, params, &mut rng).unwrap();
            assert_eq!(EmpiricalType::of(&x, 2).counts(), &[5, 5]);
        }
    }

    #[test]
    fn empty_typical_set_is_an_error() {
        let p = Distribution::uniform(2);
        assert!(matches!(TypicalSampler::new(&p, TypicalSetParams::new(5, 0.0)), Err(Error::EmptyTypicalSet { .. })));
    }

    #[test]
    fn samples_are_typical() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let params = TypicalSetParams::new(40, 0.05);
        let sampler = TypicalSampler::new(&p, params).unwrap();
        for _ in 0..10_000 {
            assert!(is_typical(&sampler.sample(&mut rng), &p, params));
        }
    }

    #[test]
    fn log_size_counts_sequences() {
        // n = 6, delta = 0.17: counts of ones in {2, 3, 4} -> 15 + 20 + 15 = 50
        let s = TypicalSampler::new(&Distribution::uniform(2), TypicalSetParams::new(6, 0.17)).unwrap();
        assert!((s.log_size().exp() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn conditional_samples_are_jointly_typical_with_fixed_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let joint = JointDistribution::new(2, 2, vec![0.35, 0.15, 0.1, 0.4]).unwrap();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i % 2 == 0)).collect();
        let sampler = ConditionalTypeSampler::new(&y, &joint, 0.0).unwrap();
        let first = EmpiricalType::joint(&y, 2, &sampler.sample(&mut rng), 2);
        for _ in 0..1000 {
            let z = sampler.sample(&mut rng);
            assert!(is_jointly_typical(&y, &z, &joint, 0.0));
            assert_eq!(EmpiricalType::joint(&y, 2, &z, 2), first);
        }
    }

    #[test]
    fn constrained_sampler_respects_both_radii() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let joint = JointDistribution::new(3, 2, vec![0.1, 0.0, 0.0, 0.1, 0.4, 0.4]).unwrap();
        let y: Vec<usize> = (0..30)
            .map(|i| {
                if i < 3 {
                    0
                } else if i < 6 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let sampler = ConstrainedConditionalSampler::new(&y, &joint, 0.08, 0.05).unwrap();
        let pz = Distribution::new(joint.marginal_b()).unwrap();
        for _ in 0..2000 {
            let z = sampler.sample(&mut rng);
            assert!(is_jointly_typical(&y, &z, &joint, 0.08));
            assert!(is_typical(&z, &pz, TypicalSetParams::new(30, 0.05)));
        }
    }
}
