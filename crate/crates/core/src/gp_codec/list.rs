//! List decoder `L(y, gamma)`: codewords whose joint type with `y` lies within
//! `gamma` (l-infinity) of `P^{(Q)}_{U,Y}` for some jammer kernel `Q_{J|S}`.

use crate::capacity::{GpChannelSpec, InnerProblem, ShannonStrategy};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::prob::ConditionalKernel;

/// Default slack added to `gamma` when comparing LP optima.
pub const DEFAULT_LP_TOL: f64 = 1e-9;

/// Which jammer kernels the decoder quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ListMode {
    /// Every `Q_{J|S}` (a linear program per candidate).
    #[default]
    Full,
    /// Only the jammer's empirical conditional type `T_{J|S}`, supplied by the
    /// harness. A diagnostic decoder: a real receiver does not know it.
    Genie,
}

impl std::str::FromStr for ListMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "lp" => Ok(ListMode::Full),
            "genie" => Ok(ListMode::Genie),
            other => Err(Error::Config(format!("unknown list mode '{other}' (full, genie)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ListDecoder {
    nu: usize,
    ny: usize,
    ns: usize,
    nj: usize,
    /// Column `(s, j)` is `P(u, y)` under `Q = point mass on j at state s`,
    /// scaled by `P_S(s)`; `P^{(Q)} = sum_{s,j} Q(j|s) col(s, j)`.
    cols: Vec<f64>,
    p_u: Vec<f64>,
    gamma: f64,
    tol: f64,
}

impl ListDecoder {
    pub fn new(
        spec: &GpChannelSpec,
        strategy: &ShannonStrategy,
        p_us: &ConditionalKernel,
        gamma: f64,
        tol: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !(tol > 0.0) {
            return Err(Error::Config(format!("gamma and the LP tolerance must be positive, got {gamma}, {tol}")));
        }
        let problem = InnerProblem::from_kernel(spec, strategy, p_us)?;
        let (nu, ns) = (strategy.u_size(), spec.s_size());
        let mut p_u = vec![0.0; nu];
        for s in 0..ns {
            for (u, pu) in p_u.iter_mut().enumerate() {
                *pu += spec.p_s.get(s) * p_us.prob(u, &[s]);
            }
        }
        Ok(Self {
            nu,
            ny: spec.y_size(),
            ns,
            nj: spec.j_size(),
            cols: problem.affine_columns().to_vec(),
            p_u,
            gamma,
            tol,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn u_size(&self) -> usize {
        self.nu
    }

    pub fn y_size(&self) -> usize {
        self.ny
    }

    pub fn p_u(&self) -> &[f64] {
        &self.p_u
    }

    pub fn s_size(&self) -> usize {
        self.ns
    }

    /// Number of entries of a kernel `Q_{J|S}`.
    pub fn kernel_size(&self) -> usize {
        self.ns * self.nj
    }

    /// Column `s * |J| + j` holds `P^{(Q)}_{U,Y}` for `Q` the point mass on `j`
    /// at `s` (weighted by `P_S(s)`), flattened like a joint type.
    pub fn columns(&self) -> &[f64] {
        &self.cols
    }

    fn cells(&self) -> usize {
        self.nu * self.ny
    }

    /// `P^{(Q)}_{U,Y}` for `q` indexed `s * |J| + j`.
    pub fn joint(&self, q: &[f64]) -> Vec<f64> {
        let cells = self.cells();
        let mut p = vec![0.0; cells];
        for (k, &w) in q.iter().enumerate() {
            if w != 0.0 {
                for (acc, a) in p.iter_mut().zip(&self.cols[k * cells..(k + 1) * cells]) {
                    *acc += w * a;
                }
            }
        }
        p
    }

    /// `||t - P^{(q)}||_inf` for a given kernel.
    pub fn deviation_at(&self, t: &[f64], q: &[f64]) -> f64 {
        self.joint(q).iter().zip(t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `min_Q ||t - P^{(Q)}||_inf`, solved as the linear program
    /// `min r  s.t.  -r <= t - A q <= r,  sum_j q(j|s) = 1,  q >= 0`.
    pub fn deviation(&self, t: &[f64]) -> Result<f64> {
        Ok(self.solve(t)?.0)
    }

    /// The optimum and a minimizing kernel.
    pub fn solve(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let cells = self.cells();
        if t.len() != cells {
            return Err(Error::DimensionMismatch(format!("joint type has {} cells, expected {cells}", t.len())));
        }
        let nq = self.ns * self.nj;
        let mut objective = vec![0.0; nq + 1];
        objective[nq] = 1.0;
        let mut lp = LinearProgram::new(objective);
        for c in 0..cells {
            let mut row: Vec<f64> = (0..nq).map(|k| self.cols[k * cells + c]).collect();
            row.push(1.0);
            lp.constrain(row.clone(), Relation::Ge, t[c]);
            row[nq] = -1.0;
            lp.constrain(row, Relation::Le, t[c]);
        }
        for s in 0..self.ns {
            let mut row = vec![0.0; nq + 1];
            row[s * self.nj..(s + 1) * self.nj].iter_mut().for_each(|x| *x = 1.0);
            lp.constrain(row, Relation::Eq, 1.0);
        }
        let sol = lp.solve()?;
        Ok((sol.objective.max(0.0), sol.x[..nq].to_vec()))
    }

    /// Sound screen: every `P^{(Q)}` has `U`-marginal `P_U`, so a member has
    /// `|T_u(u) - P_U(u)| <= |Y| gamma` for every `u`.
    pub fn passes_prefilter(&self, t: &[f64]) -> bool {
        let radius = self.ny as f64 * (self.gamma + self.tol);
        (0..self.nu).all(|u| {
            let tu: f64 = t[u * self.ny..(u + 1) * self.ny].iter().sum();
            (tu - self.p_u[u]).abs() <= radius
        })
    }

    /// Membership of a joint type `t` (indexed `u * |Y| + y`, frequencies).
    pub fn contains(&self, t: &[f64], mode: ListMode, genie: Option<&[f64]>) -> Result<bool> {
        if self.gamma >= 1.0 {
            return Ok(true);
        }
        if !self.passes_prefilter(t) {
            return Ok(false);
        }
        let dev = match (mode, genie) {
            (ListMode::Genie, Some(q)) => self.deviation_at(t, q),
            (ListMode::Genie, None) => {
                return Err(Error::Config("genie list decoding needs the jammer's conditional type".into()))
            }
            (ListMode::Full, _) => self.deviation(t)?,
        };
        Ok(dev <= self.gamma + self.tol)
    }
}

/// Joint type of `(u, y)` as frequencies indexed `u * |Y| + y`.
pub fn joint_type(u: &[usize], y: &[usize], nu: usize, ny: usize) -> Vec<f64> {
    let mut t = vec![0.0; nu * ny];
    for (&a, &b) in u.iter().zip(y) {
        t[a * ny + b] += 1.0;
    }
    let n = u.len() as f64;
    t.iter_mut().for_each(|x| *x /= n);
    t
}

/// Empirical conditional type `T_{J|S}` indexed `s * |J| + j`; states that
/// never occur get the uniform row.
pub fn conditional_type(j: &[usize], s: &[usize], nj: usize, ns: usize) -> Vec<f64> {
    let mut counts = vec![0.0; ns * nj];
    for (&b, &a) in j.iter().zip(s) {
        counts[a * nj + b] += 1.0;
    }
    for row in counts.chunks_mut(nj) {
        let tot: f64 = row.iter().sum();
        if tot > 0.0 {
            row.iter_mut().for_each(|x| *x /= tot);
        } else {
            row.iter_mut().for_each(|x| *x = 1.0 / nj as f64);
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::inner_grid_minimum;
    use crate::prob::Distribution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2x2x2x2 instance: binary U = X (state ignored), Y = X xor S xor J with a
    /// small crossover.
    pub(crate) fn small_instance() -> (GpChannelSpec, ShannonStrategy, ConditionalKernel) {
        let w = ConditionalKernel::from_fn(2, vec![2, 2, 2], |y, c| {
            let clean = c[0] ^ (c[1] & c[2]);
            if y == clean {
                0.9
            } else {
                0.1
            }
        })
        .unwrap();
        let spec = GpChannelSpec::new(w, Distribution::new(vec![0.3, 0.7]).unwrap()).unwrap();
        let strategy = ShannonStrategy::new(2, 2, 2, vec![0, 0, 1, 1]).unwrap();
        let p_us = ConditionalKernel::new(2, vec![2], vec![0.6, 0.4, 0.25, 0.75]).unwrap();
        (spec, strategy, p_us)
    }

    fn grid_deviation(dec: &ListDecoder, t: &[f64], res: usize) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..=res {
            for b in 0..=res {
                let (qa, qb) = (a as f64 / res as f64, b as f64 / res as f64);
                best = best.min(dec.deviation_at(t, &[1.0 - qa, qa, 1.0 - qb, qb]));
            }
        }
        best
    }

    #[test]
    fn vertex_kernel_gives_zero_deviation() {
        let (spec, st, p) = small_instance();
        let dec = ListDecoder::new(&spec, &st, &p, 0.01, DEFAULT_LP_TOL).unwrap();
        let t = dec.joint(&[0.0, 1.0, 1.0, 0.0]);
        assert!(dec.deviation(&t).unwrap() < 1e-12);
        assert!(dec.contains(&t, ListMode::Full, None).unwrap());
    }

    #[test]
    fn lp_matches_dense_grid() {
        let (spec, st, p) = small_instance();
        let dec = ListDecoder::new(&spec, &st, &p, 0.05, DEFAULT_LP_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let mut t: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let tot: f64 = t.iter().sum();
            t.iter_mut().for_each(|x| *x /= tot);
            let lp = dec.deviation(&t).unwrap();
            let grid = grid_deviation(&dec, &t, 64);
            // the grid can only overestimate, by at most the grid spacing
            assert!(lp <= grid + 1e-12 && grid - lp < 1.0 / 64.0, "{lp} {grid}");
        }
    }

    #[test]
    fn point_outside_the_image_is_rejected() {
        let (spec, st, p) = small_instance();
        let dec = ListDecoder::new(&spec, &st, &p, 0.05, DEFAULT_LP_TOL).unwrap();
        // push a vertex image 0.1 away in every cell, keeping total mass 1
        let base = dec.joint(&[1.0, 0.0, 1.0, 0.0]);
        let t: Vec<f64> = base.iter().enumerate().map(|(i, x)| x + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let grid = grid_deviation(&dec, &t, 64);
        assert!(grid > 0.05);
        assert!(!dec.contains(&t, ListMode::Full, None).unwrap());
    }

    #[test]
    fn gamma_one_accepts_everything() {
        let (spec, st, p) = small_instance();
        let dec = ListDecoder::new(&spec, &st, &p, 1.0, DEFAULT_LP_TOL).unwrap();
        assert!(dec.contains(&[1.0, 0.0, 0.0, 0.0], ListMode::Full, None).unwrap());
    }

    #[test]
    fn prefilter_never_drops_a_member() {
        let (spec, st, p) = small_instance();
        let dec = ListDecoder::new(&spec, &st, &p, 0.08, DEFAULT_LP_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let q: Vec<f64> = {
                let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
                vec![a, 1.0 - a, b, 1.0 - b]
            };
            let mut t = dec.joint(&q);
            for x in t.iter_mut() {
                *x = (*x + rng.random_range(-0.08..0.08)).max(0.0);
            }
            if dec.deviation(&t).unwrap() <= dec.gamma() {
                assert!(dec.passes_prefilter(&t));
            }
        }
    }

    #[test]
    fn worst_kernel_minimizes_information_not_deviation() {
        // sanity link to the capacity solver: the grid minimizer of I(U;Y)
        // lies inside the decoder's image with zero deviation
        let (spec, st, p) = small_instance();
        let problem = InnerProblem::from_kernel(&spec, &st, &p).unwrap();
        let (_, q) = inner_grid_minimum(&problem, 16);
        let dec = ListDecoder::new(&spec, &st, &p, 0.01, DEFAULT_LP_TOL).unwrap();
        assert!(dec.deviation(&dec.joint(&q)).unwrap() < 1e-12);
    }

    #[test]
    fn conditional_type_rows_sum_to_one() {
        let q = conditional_type(&[0, 1, 1, 0], &[0, 0, 0, 0], 2, 2);
        assert_eq!(q, vec![0.5, 0.5, 0.5, 0.5]);
        let q = conditional_type(&[1, 1, 0], &[0, 1, 1], 2, 2);
        assert_eq!(q, vec![0.0, 1.0, 0.5, 0.5]);
    }
}
