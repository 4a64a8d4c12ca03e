//! Exponent of the impostor probability.
//!
//! A codeword drawn uniformly from `T^n_delta(P_U)` independently of `y` lands
//! in `L(y, gamma)` with probability at most about
//! `2^{-n (min_Q I(U;Y) - gamma~)}`, where `gamma~ = f(delta) + g(gamma)`:
//!
//! - `f(delta) = H(U) - (1/n) log2 |T^n_delta(P_U)|`, the entropy lost by
//!   restricting to typical sequences (computed exactly from the type classes);
//! - `g(gamma) = max H_tau(U|Y) - H_{Q*}(U|Y)` over joint laws `tau` within
//!   `gamma` of some `P^{(Q)}_{U,Y}` whose `U`-marginal is within `delta` of
//!   `P_U`, with `Q*` the minimizing jammer.
//!
//! The maximum is found by Frank-Wolfe with the linear program as oracle, and
//! the duality gap is added so `g` is an upper bound. The polynomial number of
//! joint types is not included.

use std::f64::consts::LN_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rayon::prelude::*;

use super::ensemble::GpEnsemble;
use super::list::{ListDecoder, ListMode, DEFAULT_LP_TOL};
use super::simulate::{channel_output, sample_iid};
use super::GpDesign;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::prob::{entropy_bits, TypicalSampler, TypicalSetParams};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpostorExponent {
    /// `min_Q I(U;Y)` in bits.
    pub min_information: f64,
    pub typical_deficit: f64,
    pub entropy_excess: f64,
    pub gamma_tilde: f64,
    /// Frank-Wolfe duality gap included in `entropy_excess`.
    pub fw_gap: f64,
}

impl ImpostorExponent {
    /// `min_Q I(U;Y) - gamma~`.
    pub fn exponent(&self) -> f64 {
        self.min_information - self.gamma_tilde
    }

    /// `factor * 2^{-n (min_Q I(U;Y) - gamma~)}`.
    pub fn bound(&self, n: usize, factor: f64) -> f64 {
        factor * (-(n as f64) * self.exponent()).exp2()
    }
}

/// `H(U|Y)` in bits for a joint law indexed `u * |Y| + y`.
pub fn conditional_entropy(t: &[f64], nu: usize, ny: usize) -> f64 {
    let mut h = 0.0;
    for y in 0..ny {
        let py: f64 = (0..nu).map(|u| t[u * ny + y]).sum();
        for u in 0..nu {
            let p = t[u * ny + y];
            if p > 0.0 {
                h -= p * (p / py).log2();
            }
        }
    }
    h
}

fn region_program(decoder: &ListDecoder, objective: Vec<f64>, marginal_delta: f64) -> LinearProgram {
    let (nu, ny) = (decoder.u_size(), decoder.y_size());
    let cells = nu * ny;
    let nq = decoder.kernel_size();
    let cols = decoder.columns();
    let gamma = decoder.gamma();
    let mut lp = LinearProgram::new(objective);
    for c in 0..cells {
        // tau_c - (A q)_c in [-gamma, gamma]
        let mut row = vec![0.0; cells + nq];
        row[c] = 1.0;
        for k in 0..nq {
            row[cells + k] = -cols[k * cells + c];
        }
        lp.constrain(row.clone(), Relation::Le, gamma);
        lp.constrain(row, Relation::Ge, -gamma);
    }
    let mut total = vec![0.0; cells + nq];
    total[..cells].iter_mut().for_each(|x| *x = 1.0);
    lp.constrain(total, Relation::Eq, 1.0);
    let nj = nq / decoder.s_size();
    for s in 0..decoder.s_size() {
        let mut row = vec![0.0; cells + nq];
        row[cells + s * nj..cells + (s + 1) * nj].iter_mut().for_each(|x| *x = 1.0);
        lp.constrain(row, Relation::Eq, 1.0);
    }
    for u in 0..nu {
        let mut row = vec![0.0; cells + nq];
        row[u * ny..(u + 1) * ny].iter_mut().for_each(|x| *x = 1.0);
        lp.constrain(row.clone(), Relation::Le, decoder.p_u()[u] + marginal_delta);
        lp.constrain(row, Relation::Ge, decoder.p_u()[u] - marginal_delta);
    }
    lp
}

/// Upper bound on `max H_tau(U|Y)` over the list region, with the final
/// Frank-Wolfe gap. Starts from `P^{(Q)}` at the uniform kernel.
pub fn max_list_entropy(decoder: &ListDecoder, marginal_delta: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)> {
    let (nu, ny) = (decoder.u_size(), decoder.y_size());
    let cells = nu * ny;
    let nq = decoder.kernel_size();
    let nj = nq / decoder.s_size();
    let mut tau = decoder.joint(&vec![1.0 / nj as f64; nq]);
    let mut h = conditional_entropy(&tau, nu, ny);
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let mut grad = vec![0.0; cells + nq];
        for y in 0..ny {
            let py: f64 = (0..nu).map(|u| tau[u * ny + y]).sum();
            for u in 0..nu {
                let p = tau[u * ny + y].max(1e-15);
                grad[u * ny + y] = -(p / py.max(1e-15)).log2();
            }
        }
        let objective: Vec<f64> = grad.iter().map(|g| -g).collect();
        let vertex = region_program(decoder, objective, marginal_delta).solve()?;
        let v = &vertex.x[..cells];
        gap = grad[..cells].iter().zip(v.iter().zip(&tau)).map(|(g, (a, b))| g * (a - b)).sum::<f64>().max(0.0);
        if gap <= tol {
            break;
        }
        // golden-section search on the concave restriction to the segment
        let at = |l: f64| {
            let mix: Vec<f64> = tau.iter().zip(v).map(|(a, b)| (1.0 - l) * a + l * b).collect();
            conditional_entropy(&mix, nu, ny)
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if at(a) < at(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        let step = (lo + hi) / 2.0;
        tau = tau.iter().zip(v).map(|(a, b)| (1.0 - step) * a + step * b).collect();
        h = conditional_entropy(&tau, nu, ny);
    }
    Ok((h + gap, gap))
}

/// `f(delta)` in bits.
pub fn typical_deficit(design: &GpDesign, n: usize, delta: f64) -> Result<f64> {
    let p_u = design.p_u();
    let sampler = TypicalSampler::new(&p_u, TypicalSetParams::new(n, delta))?;
    Ok(entropy_bits(p_u.mass()) - sampler.log_size() / LN_2 / n as f64)
}

pub fn impostor_exponent(design: &GpDesign, n: usize, delta: f64, gamma: f64) -> Result<ImpostorExponent> {
    let decoder = ListDecoder::new(&design.spec, &design.strategy, &design.p_us, gamma, 1e-9)?;
    let worst = design.worst_jammer()?;
    let min_information = worst.mutual_information;
    let h_worst = entropy_bits(design.p_u().mass()) - min_information;
    let (h_max, fw_gap) = max_list_entropy(&decoder, delta, 1e-6, 5000)?;
    let typical_deficit = typical_deficit(design, n, delta)?;
    let entropy_excess = (h_max - h_worst).max(0.0);
    Ok(ImpostorExponent {
        min_information,
        typical_deficit,
        entropy_excess,
        gamma_tilde: typical_deficit + entropy_excess,
        fw_gap,
    })
}

/// Exact impostor probability averaged over blocks, next to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpostorCheck {
    pub n: usize,
    pub gamma: f64,
    pub trials: u64,
    /// Mean over blocks of `P(u' in L(y, gamma))` for an independent uniform
    /// typical `u'`, computed exactly for each `y`.
    pub mean_probability: f64,
    pub exponent: ImpostorExponent,
    /// `factor * 2^{-n (min_Q I(U;Y) - gamma~)}`.
    pub bound: f64,
}

impl ImpostorCheck {
    pub fn holds(&self) -> bool {
        self.mean_probability <= self.bound
    }
}

/// Blocks with i.i.d. states, a codeword drawn in law from the encoder's
/// qualifying set and the worst memoryless jammer. Block `t` uses channel
/// stream `t`.
#[allow(clippy::too_many_arguments)]
pub fn impostor_check(
    design: &GpDesign,
    n: usize,
    delta: f64,
    delta1: f64,
    gamma: f64,
    trials: u64,
    factor: f64,
    seed: u64,
) -> Result<ImpostorCheck> {
    let worst = design.worst_jammer()?;
    let ensemble = GpEnsemble::new(design, n, 2.0, 1.0, delta, delta1)?;
    let decoder = ListDecoder::new(&design.spec, &design.strategy, &design.p_us, gamma, DEFAULT_LP_TOL)?;
    let rows = (0..design.spec.s_size())
        .map(|s| WeightedIndex::new(worst.q.slice(s).iter().copied()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let total: f64 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = stream(seed, Domain::Channel, t);
            let s = sample_iid(design.spec.p_s.mass(), n, &mut rng);
            let u = ensemble.qualifying_codeword(&s, &mut rng)?.unwrap_or_else(|| ensemble.fresh_codeword(&mut rng));
            let x = design.strategy.map(&u, &s);
            let j: Vec<usize> = s.iter().map(|&si| rows[si].sample(&mut rng)).collect();
            let y = channel_output(&design.spec, &x, &s, &j, &mut rng);
            ensemble.impostor_probability(&y, &decoder, ListMode::Full, None)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    let exponent = impostor_exponent(design, n, delta, gamma)?;
    Ok(ImpostorCheck {
        n,
        gamma,
        trials,
        mean_probability: total / trials as f64,
        exponent,
        bound: exponent.bound(n, factor),
    })
}
