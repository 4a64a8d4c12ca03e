//! Refined Markov lemma: for `X -> Y -> Z`, a fixed jointly typical pair
//! `(x, y)` and `Z` uniform on the conditional typical set of `y`, the triple
//! is jointly typical with probability approaching one at a rate that does not
//! depend on how small the cells of `P_{X,Y}` are.

use rayon::prelude::*;
use serde_json::json;

use super::{batch_rng, batches, LemmaRecord};
use crate::error::{Error, Result};
use crate::prob::{nominal_counts, ConditionalKernel, ConditionalTypeSampler, JointDistribution};
use crate::stats::{linear_fit, wilson95};

/// A chain `X -> Y -> Z` and the rule producing the fixed pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovInstance {
    pub label: String,
    pub x_size: usize,
    pub y_size: usize,
    /// `P_{X,Y}` indexed `x * |Y| + y`.
    pub p_xy: Vec<f64>,
    /// `P_{Z|Y}`.
    pub p_z_given_y: ConditionalKernel,
    /// Cell `(x, y)` that occurs exactly once in the pair; `P_{X,Y}` is then
    /// taken to be the pair's joint type.
    pub rare_cell: Option<(usize, usize)>,
}

impl MarkovInstance {
    pub fn new(
        label: impl Into<String>,
        x_size: usize,
        p_xy: Vec<f64>,
        p_z_given_y: ConditionalKernel,
        rare_cell: Option<(usize, usize)>,
    ) -> Result<Self> {
        let y_size = p_z_given_y.slice_count();
        if p_xy.len() != x_size * y_size || p_z_given_y.conditions().len() != 1 {
            return Err(Error::DimensionMismatch("P_{X,Y} and P_{Z|Y} disagree on |Y|".into()));
        }
        if rare_cell.is_some_and(|(a, b)| a >= x_size || b >= y_size) {
            return Err(Error::DimensionMismatch("rare cell outside the alphabet".into()));
        }
        Ok(Self { label: label.into(), x_size, y_size, p_xy, p_z_given_y, rare_cell })
    }

    /// 2x2x2 chain with `P_{X,Y}` = (0.3, 0.2; 0.1, 0.4).
    pub fn binary() -> Self {
        let pz = ConditionalKernel::new(2, vec![2], vec![0.7, 0.3, 0.2, 0.8]).expect("valid kernel");
        Self::new("binary", 2, vec![0.3, 0.2, 0.1, 0.4], pz, None).expect("valid instance")
    }

    /// The binary chain with the pair `(x, y) = (1, 0)` occurring once, so
    /// `P_{X,Y}` has a cell of mass `1/n`.
    pub fn binary_rare_cell() -> Self {
        Self { label: "binary_rare_cell".into(), rare_cell: Some((1, 0)), ..Self::binary() }
    }

    pub fn z_size(&self) -> usize {
        self.p_z_given_y.outputs()
    }

    /// The fixed pair and the `P_{X,Y}` it is typical for.
    pub fn pair(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<f64>)> {
        let ny = self.y_size;
        let mut counts = nominal_counts(&self.p_xy, n);
        let p = match self.rare_cell {
            None => self.p_xy.clone(),
            Some((a, b)) => {
                // move mass within column b so the y-marginal is unchanged
                let cell = a * ny + b;
                let donor = (0..self.x_size)
                    .map(|x| x * ny + b)
                    .filter(|&c| c != cell)
                    .max_by_key(|&c| (counts[c], std::cmp::Reverse(c)))
                    .ok_or_else(|| Error::Domain("rare cell needs |X| >= 2".into()))?;
                let total = counts[cell] + counts[donor];
                if total < 2 {
                    return Err(Error::Domain(format!("n = {n} too small for the rare-cell pair")));
                }
                counts[cell] = 1;
                counts[donor] = total - 1;
                counts.iter().map(|&c| c as f64 / n as f64).collect()
            }
        };
        let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for (c, &k) in counts.iter().enumerate() {
            x.extend(std::iter::repeat_n(c / ny, k));
            y.extend(std::iter::repeat_n(c % ny, k));
        }
        Ok((x, y, p))
    }
}

/// `max |N(x,y,z)/n - P_{X,Y}(x,y) P_{Z|Y}(z|y)|` for `trials` draws of `Z`
/// uniform on `T^n_{delta0}(P_Y P_{Z|Y} | y)`.
pub fn markov_deviations(
    inst: &MarkovInstance,
    n: usize,
    delta0: f64,
    trials: u64,
    seed: u64,
    point: u64,
) -> Result<Vec<f64>> {
    let (x, y, p_xy) = inst.pair(n)?;
    let (ny, nz) = (inst.y_size, inst.z_size());
    let p_y: Vec<f64> = (0..ny).map(|b| (0..inst.x_size).map(|a| p_xy[a * ny + b]).sum()).collect();
    let joint_yz = JointDistribution::new(
        ny,
        nz,
        (0..ny)
            .flat_map(|b| (0..nz).map(move |c| (b, c)))
            .map(|(b, c)| p_y[b] * inst.p_z_given_y.prob(c, &[b]))
            .collect(),
    )?;
    let sampler = ConditionalTypeSampler::new(&y, &joint_yz, delta0)?;
    let target: Vec<f64> = (0..inst.x_size * ny * nz)
        .map(|k| {
            let (xy, c) = (k / nz, k % nz);
            p_xy[xy] * inst.p_z_given_y.prob(c, &[xy % ny])
        })
        .collect();
    let nf = n as f64;
    let devs = batches(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = batch_rng(seed, point, b);
            let mut counts = vec![0usize; target.len()];
            (0..size)
                .map(|_| {
                    let z = sampler.sample(&mut rng);
                    counts.iter_mut().for_each(|c| *c = 0);
                    for i in 0..n {
                        counts[(x[i] * ny + y[i]) * nz + z[i]] += 1;
                    }
                    counts.iter().zip(&target).map(|(&c, &p)| (c as f64 / nf - p).abs()).fold(0.0, f64::max)
                })
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>();
    Ok(devs.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPoint {
    pub n: usize,
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Violation rates along the `n` grid for one typicality radius `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovDecay {
    pub delta: f64,
    pub points: Vec<MarkovPoint>,
    /// `-slope` of `ln(rate)` against `n` over the points with at least
    /// [`MIN_EVENTS`] violations; `None` with fewer than two such points.
    pub k_hat: Option<f64>,
    pub intercept: f64,
    /// Points used in the fit.
    pub fitted: usize,
}

/// Points with fewer violations than this are left out of the decay fit.
pub const MIN_EVENTS: u64 = 10;

impl MarkovDecay {
    fn from_points(delta: f64, points: Vec<MarkovPoint>) -> Self {
        let used: Vec<&MarkovPoint> = points.iter().filter(|p| p.violations >= MIN_EVENTS).collect();
        let (k_hat, intercept) = if used.len() >= 2 {
            let xs: Vec<f64> = used.iter().map(|p| p.n as f64).collect();
            let ys: Vec<f64> = used.iter().map(|p| p.rate.ln()).collect();
            let fit = linear_fit(&xs, &ys);
            (Some(-fit.slope), fit.intercept)
        } else {
            (None, f64::NAN)
        };
        let fitted = used.len();
        Self { delta, points, k_hat, intercept, fitted }
    }

    /// Positive fitted exponent and rates non-increasing within their
    /// confidence intervals.
    pub fn decays(&self) -> bool {
        self.k_hat.is_some_and(|k| k > 0.0) && self.points.windows(2).all(|w| w[1].ci_lo <= w[0].ci_hi)
    }

    pub fn records(&self, inst: &MarkovInstance, delta0: f64) -> Vec<LemmaRecord> {
        self.points
            .iter()
            .map(|p| LemmaRecord {
                lemma_id: "markov",
                params: json!({
                    "instance": inst.label,
                    "delta0": delta0,
                    "delta": self.delta,
                    "k_hat": self.k_hat,
                })
                .to_string(),
                n: p.n,
                trials: p.trials,
                violations: p.violations,
                rate: p.rate,
                // fitted curve exp(a - K n)
                bound: self.k_hat.map_or(f64::NAN, |k| (self.intercept - k * p.n as f64).exp()),
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSweep {
    pub delta0: f64,
    pub decays: Vec<MarkovDecay>,
    /// Index of the smallest `delta` whose rates decay.
    pub chosen: Option<usize>,
}

impl MarkovSweep {
    pub fn chosen(&self) -> Option<&MarkovDecay> {
        self.chosen.map(|i| &self.decays[i])
    }
}

/// Violation rates for every `delta` in `deltas` (ascending) on the `n` grid.
/// The same draws of `Z` serve every `delta`.
pub fn markov_sweep(
    inst: &MarkovInstance,
    ns: &[usize],
    delta0: f64,
    deltas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<MarkovSweep> {
    let devs = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| markov_deviations(inst, n, delta0, trials, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let decays: Vec<MarkovDecay> = deltas
        .iter()
        .map(|&delta| {
            let points = ns
                .iter()
                .zip(&devs)
                .map(|(&n, d)| {
                    let violations = d.iter().filter(|&&v| v > delta).count() as u64;
                    let (ci_lo, ci_hi) = wilson95(violations, trials);
                    MarkovPoint { n, trials, violations, rate: violations as f64 / trials as f64, ci_lo, ci_hi }
                })
                .collect();
            MarkovDecay::from_points(delta, points)
        })
        .collect();
    let chosen = decays.iter().position(MarkovDecay::decays);
    Ok(MarkovSweep { delta0, decays, chosen })
}
