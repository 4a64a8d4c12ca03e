//! Capacity of the state-dependent AVC with a state-aware jammer.
//!
//! The discrete value is the max-min program
//! `max_{P_{U|S}, x(u,s)} min_{Q_{J|S}} I(U;Y) - I(U;S)`; the Gaussian value is
//! the closed form `0.5 log2(1 + P / (Lambda + sigma^2))`.

mod dp;
mod inner;
mod outer;
pub mod presets;

pub use dp::{dp_avc_capacity, DpChannelSpec};
pub use inner::{inner_grid_minimum, worst_memoryless_jammer, InnerOptions, InnerProblem, InnerSolution};
pub use outer::{gp_avc_capacity, project_simplex, GpCapacityResult, GpSolverConfig, SolverDiagnostics};

use crate::error::{Error, Result};
use crate::prob::{mutual_information_table, ConditionalKernel, Distribution};

/// Discrete channel `W(y | x, s, j)` with i.i.d. state law `P_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpChannelSpec {
    /// Kernel with output `Y` and conditions `[X, S, J]`.
    pub w: ConditionalKernel,
    pub p_s: Distribution,
}

impl GpChannelSpec {
    pub fn new(w: ConditionalKernel, p_s: Distribution) -> Result<Self> {
        let c = w.conditions();
        if c.len() != 3 {
            return Err(Error::DimensionMismatch(format!("W must be conditioned on (x, s, j), got {} axes", c.len())));
        }
        if c[1] != p_s.len() {
            return Err(Error::DimensionMismatch(format!("W has {} states but P_S has {} entries", c[1], p_s.len())));
        }
        if p_s.mass().iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidDistribution("every state must have positive probability".into()));
        }
        Ok(Self { w, p_s })
    }

    pub fn x_size(&self) -> usize {
        self.w.conditions()[0]
    }

    pub fn s_size(&self) -> usize {
        self.w.conditions()[1]
    }

    pub fn j_size(&self) -> usize {
        self.w.conditions()[2]
    }

    pub fn y_size(&self) -> usize {
        self.w.outputs()
    }

    pub fn w(&self, y: usize, x: usize, s: usize, j: usize) -> f64 {
        self.w.table()[((x * self.s_size() + s) * self.j_size() + j) * self.y_size() + y]
    }

    /// `|X|^|S|`, or `None` on overflow.
    pub fn strategy_bound(&self) -> Option<usize> {
        self.x_size().checked_pow(self.s_size() as u32)
    }
}

/// A Shannon strategy `x(u, s)` stored as a `|U| x |S|` table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShannonStrategy {
    u_size: usize,
    s_size: usize,
    x_size: usize,
    table: Vec<usize>,
}

impl ShannonStrategy {
    pub fn new(u_size: usize, s_size: usize, x_size: usize, table: Vec<usize>) -> Result<Self> {
        if u_size == 0 || table.len() != u_size * s_size {
            return Err(Error::DimensionMismatch(format!(
                "strategy table has {} entries, expected {u_size} x {s_size}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= x_size) {
            return Err(Error::DimensionMismatch(format!("strategy symbol {bad} outside input alphabet")));
        }
        if let Some(bound) = x_size.checked_pow(s_size as u32) {
            if u_size > bound {
                return Err(Error::DimensionMismatch(format!("|U| = {u_size} exceeds |X|^|S| = {bound}")));
            }
        }
        Ok(Self { u_size, s_size, x_size, table })
    }

    /// Every map `S -> X` as one row: `x(u, s)` is digit `s` of `u` in base `|X|`.
    pub fn canonical(x_size: usize, s_size: usize) -> Result<Self> {
        let u_size =
            x_size.checked_pow(s_size as u32).ok_or_else(|| Error::ProblemTooLarge("|X|^|S| overflows".into()))?;
        let table = (0..u_size).flat_map(|u| (0..s_size).map(move |s| (u / x_size.pow(s as u32)) % x_size)).collect();
        Ok(Self { u_size, s_size, x_size, table })
    }

    /// Identity strategy `x(u, s) = u` for `|U| = |X|`.
    pub fn ignore_state(x_size: usize, s_size: usize) -> Self {
        let table = (0..x_size).flat_map(|u| std::iter::repeat_n(u, s_size)).collect();
        Self { u_size: x_size, s_size, x_size, table }
    }

    pub fn u_size(&self) -> usize {
        self.u_size
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, u: usize, s: usize) -> usize {
        self.table[u * self.s_size + s]
    }

    /// Symbol-wise image `x_i = x(u_i, s_i)`.
    pub fn map(&self, u: &[usize], s: &[usize]) -> Vec<usize> {
        u.iter().zip(s).map(|(&a, &b)| self.apply(a, b)).collect()
    }
}

/// `V(y | x, s) = sum_j W(y | x, s, j) Q(j | s)`.
pub fn induced_channel(w: &ConditionalKernel, q: &ConditionalKernel) -> Result<ConditionalKernel> {
    let c = w.conditions();
    if c.len() != 3 || q.conditions() != [c[1]] || q.outputs() != c[2] {
        return Err(Error::DimensionMismatch(format!(
            "W conditions {:?} incompatible with Q over {} letters given {:?}",
            c,
            q.outputs(),
            q.conditions()
        )));
    }
    let (ny, nx, ns, nj) = (w.outputs(), c[0], c[1], c[2]);
    ConditionalKernel::from_fn(ny, vec![nx, ns], |y, xs| {
        let (x, s) = (xs[0], xs[1]);
        (0..nj).map(|j| w.prob(y, &[x, s, j]) * q.prob(j, &[s])).sum()
    })
}

fn check_dims(p_us: &ConditionalKernel, strategy: &ShannonStrategy, spec: &GpChannelSpec) -> Result<()> {
    if p_us.conditions() != [spec.s_size()] || p_us.outputs() != strategy.u_size() {
        return Err(Error::DimensionMismatch("P_{U|S} does not match |U| x |S|".into()));
    }
    if strategy.s_size() != spec.s_size() || strategy.x_size() != spec.x_size() {
        return Err(Error::DimensionMismatch("strategy does not match the channel alphabets".into()));
    }
    Ok(())
}

/// `I(U;S)` in bits for `P_S * P_{U|S}`, `p_us` indexed `s * |U| + u`.
pub(crate) fn state_information(p_s: &[f64], p_us: &[f64], u_size: usize) -> f64 {
    let joint: Vec<f64> =
        p_s.iter().enumerate().flat_map(|(s, &ps)| (0..u_size).map(move |u| ps * p_us[s * u_size + u])).collect();
    mutual_information_table(&joint, p_s.len(), u_size)
}

/// `I(U;Y) - I(U;S)` in bits for the joint law
/// `P_S(s) P(u|s) 1{x = x(u,s)} W(y|x,s,j) Q(j|s)`, marginalized over `s, x, j`
/// in that order.
pub fn objective(
    p_us: &ConditionalKernel,
    strategy: &ShannonStrategy,
    q: &ConditionalKernel,
    spec: &GpChannelSpec,
) -> Result<f64> {
    check_dims(p_us, strategy, spec)?;
    if q.conditions() != [spec.s_size()] || q.outputs() != spec.j_size() {
        return Err(Error::DimensionMismatch("Q_{J|S} does not match |J| x |S|".into()));
    }
    let problem = InnerProblem::new(spec, strategy, p_us.table())?;
    Ok(problem.mutual_information(q.table()) - problem.state_information())
}
