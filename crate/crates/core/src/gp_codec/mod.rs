//! Random binned coding for the discrete channel: typical codebook,
//! joint-typicality encoder and the list decoder `L(y, gamma)`.

pub mod analysis;
pub mod codebook;
pub mod ensemble;
pub mod list;
pub mod simulate;

use crate::capacity::{GpCapacityResult, GpChannelSpec, InnerOptions, InnerProblem, InnerSolution, ShannonStrategy};
use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, Distribution, JointDistribution};

/// A choice of `(P_{U|S}, x(u,s))` for a channel: everything the code is
/// built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GpDesign {
    pub spec: GpChannelSpec,
    pub strategy: ShannonStrategy,
    pub p_us: ConditionalKernel,
}

impl GpDesign {
    pub fn new(spec: GpChannelSpec, strategy: ShannonStrategy, p_us: ConditionalKernel) -> Result<Self> {
        if p_us.outputs() != strategy.u_size()
            || p_us.conditions() != [spec.s_size()]
            || strategy.s_size() != spec.s_size()
            || strategy.x_size() != spec.x_size()
        {
            return Err(Error::DimensionMismatch("P_{U|S}, x(u,s) and the channel disagree on alphabets".into()));
        }
        if strategy.u_size() > 256 {
            return Err(Error::ProblemTooLarge(format!("|U| = {} exceeds 256", strategy.u_size())));
        }
        Ok(Self { spec, strategy, p_us })
    }

    /// The optimizing design returned by the capacity solver.
    pub fn from_capacity(spec: GpChannelSpec, result: &GpCapacityResult) -> Result<Self> {
        Self::new(spec, result.strategy.clone(), result.p_us.clone())
    }

    pub fn u_size(&self) -> usize {
        self.strategy.u_size()
    }

    /// `P_{S,U}` with rows indexed by `s`.
    pub fn joint_su(&self) -> JointDistribution {
        let (ns, nu) = (self.spec.s_size(), self.u_size());
        let mass = (0..ns)
            .flat_map(|s| (0..nu).map(move |u| (s, u)))
            .map(|(s, u)| self.spec.p_s.get(s) * self.p_us.prob(u, &[s]))
            .collect();
        JointDistribution::new(ns, nu, mass).expect("product of valid laws")
    }

    pub fn p_u(&self) -> Distribution {
        Distribution::new(self.joint_su().marginal_b()).expect("marginal of a valid law")
    }

    pub fn inner_problem(&self) -> InnerProblem {
        InnerProblem::from_kernel(&self.spec, &self.strategy, &self.p_us).expect("dimensions checked in new")
    }

    /// `min_Q I(U;Y) - I(U;S)` for this design, with the minimizing `Q`.
    pub fn worst_jammer(&self) -> Result<InnerSolution> {
        self.inner_problem().solve(&InnerOptions::default(), None)
    }

    pub fn state_information(&self) -> f64 {
        self.inner_problem().state_information()
    }
}

/// Small designs used by the examples and tests.
pub mod fixtures {
    use super::*;

    /// Stuck-at cell with a jammer that raises the read noise. `S = 0, 1`:
    /// stuck at that value; `S = 2`: writes `X`. The output is the cell value
    /// through a BSC with crossover `noise[j]`. Binary `U` with `x(u, s) = u`.
    pub fn noisy_stuck_at(p: f64, noise: [f64; 2]) -> GpDesign {
        let spec = crate::capacity::presets::noisy_stuck_at(p, noise).unwrap();
        let strategy = ShannonStrategy::new(2, 3, 2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let p_us = ConditionalKernel::new(2, vec![3], vec![0.9, 0.1, 0.1, 0.9, 0.5, 0.5]).unwrap();
        GpDesign::new(spec, strategy, p_us).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::noisy_stuck_at;

    #[test]
    fn design_marginals() {
        let d = noisy_stuck_at(0.2, [0.0, 0.1]);
        let pu = d.p_u();
        assert!((pu.get(0) - 0.5).abs() < 1e-12);
        let sol = d.worst_jammer().unwrap();
        // the noisier read is the worst jammer choice in every state
        for s in 0..3 {
            assert!(sol.q.prob(1, &[s]) > 0.99, "{:?}", sol.q);
        }
        assert!(d.state_information() > 0.0);
    }
}
