//! Inner minimization over memoryless jammers.
//!
//! For fixed `P_{U|S}` and strategy, `P(u, y) = sum_{s,j} A[(u,y),(s,j)] Q(j|s)`
//! with `A = P_S(s) P(u|s) W(y | x(u,s), s, j)`, so `I(U;Y)` is a convex
//! function of `Q` on a product of simplices. It is minimized by block
//! pairwise Frank-Wolfe with exact line search.

use super::{check_dims, state_information, GpChannelSpec, ShannonStrategy};
use crate::error::{Error, Result};
use crate::prob::{compositions, mutual_information_table, ConditionalKernel};

/// Floor inside logarithms so that empty cells give a large finite slope.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Stop once the Frank-Wolfe duality gap (bits) falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// Minimizing `Q_{J|S}`.
    pub q: ConditionalKernel,
    /// `I(U;Y)` at `q`.
    pub mutual_information: f64,
    /// `I(U;Y) - I(U;S)` at `q`.
    pub value: f64,
    /// Frank-Wolfe gap at termination: an upper bound on suboptimality.
    pub gap: f64,
    pub iterations: usize,
}

/// The inner problem for one `(P_{U|S}, x(u,s))` pair.
#[derive(Debug, Clone)]
pub struct InnerProblem {
    nu: usize,
    ny: usize,
    ns: usize,
    nj: usize,
    /// Column `(s, j)` holds `A[., (s, j)]` as a `|U| x |Y|` table.
    cols: Vec<f64>,
    i_us: f64,
}

impl InnerProblem {
    /// `p_us` is indexed `s * |U| + u`.
    pub fn new(spec: &GpChannelSpec, strategy: &ShannonStrategy, p_us: &[f64]) -> Result<Self> {
        let (nu, ny, ns, nj) = (strategy.u_size(), spec.y_size(), spec.s_size(), spec.j_size());
        if p_us.len() != nu * ns || strategy.s_size() != ns || strategy.x_size() != spec.x_size() {
            return Err(Error::DimensionMismatch("inner problem dimensions".into()));
        }
        let cell = nu * ny;
        let mut cols = vec![0.0; ns * nj * cell];
        for s in 0..ns {
            let ps = spec.p_s.get(s);
            for j in 0..nj {
                let col = &mut cols[(s * nj + j) * cell..(s * nj + j + 1) * cell];
                for u in 0..nu {
                    let w = ps * p_us[s * nu + u];
                    if w == 0.0 {
                        continue;
                    }
                    let x = strategy.apply(u, s);
                    for y in 0..ny {
                        col[u * ny + y] = w * spec.w(y, x, s, j);
                    }
                }
            }
        }
        let i_us = state_information(spec.p_s.mass(), p_us, nu);
        Ok(Self { nu, ny, ns, nj, cols, i_us })
    }

    pub fn from_kernel(spec: &GpChannelSpec, strategy: &ShannonStrategy, p_us: &ConditionalKernel) -> Result<Self> {
        check_dims(p_us, strategy, spec)?;
        Self::new(spec, strategy, p_us.table())
    }

    pub fn j_size(&self) -> usize {
        self.nj
    }

    pub fn s_size(&self) -> usize {
        self.ns
    }

    pub fn u_size(&self) -> usize {
        self.nu
    }

    pub fn y_size(&self) -> usize {
        self.ny
    }

    /// `I(U;S)`, independent of the jammer.
    pub fn state_information(&self) -> f64 {
        self.i_us
    }

    fn col(&self, s: usize, j: usize) -> &[f64] {
        let cell = self.nu * self.ny;
        &self.cols[(s * self.nj + j) * cell..(s * self.nj + j + 1) * cell]
    }

    /// Joint `P(u, y)` under `q` (indexed `s * |J| + j`).
    pub fn joint_uy(&self, q: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.nu * self.ny];
        for s in 0..self.ns {
            for j in 0..self.nj {
                let w = q[s * self.nj + j];
                if w != 0.0 {
                    for (acc, a) in p.iter_mut().zip(self.col(s, j)) {
                        *acc += w * a;
                    }
                }
            }
        }
        p
    }

    /// Affine map `Q -> P(u, y)` as a dense matrix: rows are `(u, y)` cells,
    /// columns are `(s, j)` pairs.
    pub fn affine_columns(&self) -> &[f64] {
        &self.cols
    }

    pub fn mutual_information(&self, q: &[f64]) -> f64 {
        mutual_information_table(&self.joint_uy(q), self.nu, self.ny)
    }

    /// `log2 P(u, y) / P(y)`, the partial derivative of `I(U;Y)` in `P(u, y)`
    /// up to a per-`u` constant that cancels on every simplex.
    fn slopes(&self, p: &[f64]) -> Vec<f64> {
        let mut py = vec![0.0; self.ny];
        for u in 0..self.nu {
            for y in 0..self.ny {
                py[y] += p[u * self.ny + y];
            }
        }
        let mut out = vec![0.0; p.len()];
        for u in 0..self.nu {
            for y in 0..self.ny {
                let i = u * self.ny + y;
                out[i] = (p[i].max(LOG_FLOOR) / py[y].max(LOG_FLOOR)).log2();
            }
        }
        out
    }

    fn gradient(&self, slopes: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.ns * self.nj];
        for s in 0..self.ns {
            for j in 0..self.nj {
                g[s * self.nj + j] = self.col(s, j).iter().zip(slopes).map(|(a, l)| a * l).sum();
            }
        }
        g
    }

    fn fw_gap(&self, q: &[f64], g: &[f64]) -> f64 {
        (0..self.ns)
            .map(|s| {
                let gs = &g[s * self.nj..(s + 1) * self.nj];
                let qs = &q[s * self.nj..(s + 1) * self.nj];
                let min = gs.iter().copied().fold(f64::INFINITY, f64::min);
                qs.iter().zip(gs).map(|(a, b)| a * b).sum::<f64>() - min
            })
            .sum::<f64>()
            .max(0.0)
    }

    /// Minimize `I(U;Y)` over `Q_{J|S}`. `start` (indexed `s * |J| + j`)
    /// warm-starts the iteration; uniform otherwise.
    pub fn solve(&self, opts: &InnerOptions, start: Option<&[f64]>) -> Result<InnerSolution> {
        let nj = self.nj;
        let mut q = match start {
            Some(s) => s.to_vec(),
            None => vec![1.0 / nj as f64; self.ns * nj],
        };
        let mut p = self.joint_uy(&q);
        let mut iterations = 0;
        let gap = loop {
            let slopes = self.slopes(&p);
            let g = self.gradient(&slopes);
            let gap = self.fw_gap(&q, &g);
            if gap < opts.tol || nj == 1 {
                break gap;
            }
            if iterations >= opts.max_iter {
                return Err(Error::NonConvergence(format!(
                    "inner Frank-Wolfe gap {gap:.3e} after {iterations} iterations"
                )));
            }
            iterations += 1;
            // block with the widest pairwise gap
            let mut best = (0usize, 0usize, 0usize, 0.0f64);
            for s in 0..self.ns {
                let gs = &g[s * nj..(s + 1) * nj];
                let qs = &q[s * nj..(s + 1) * nj];
                let fw = (0..nj).min_by(|&a, &b| gs[a].total_cmp(&gs[b])).unwrap();
                let aw = (0..nj).filter(|&j| qs[j] > 0.0).max_by(|&a, &b| gs[a].total_cmp(&gs[b])).unwrap();
                let width = gs[aw] - gs[fw];
                if width > best.3 {
                    best = (s, fw, aw, width);
                }
            }
            let (s, fw, aw, _) = best;
            let max_step = q[s * nj + aw];
            let dir: Vec<f64> = self.col(s, fw).iter().zip(self.col(s, aw)).map(|(a, b)| a - b).collect();
            let step = self.line_search(&p, &dir, max_step);
            if step <= 0.0 {
                // numerically flat along the best direction
                break gap;
            }
            q[s * nj + fw] += step;
            q[s * nj + aw] -= step;
            if q[s * nj + aw] < 1e-15 {
                q[s * nj + aw] = 0.0;
            }
            for (pi, d) in p.iter_mut().zip(&dir) {
                *pi += step * d;
            }
            // refresh the joint occasionally to stop drift
            if iterations % 64 == 0 {
                p = self.joint_uy(&q);
            }
        };
        let q = ConditionalKernel::new(nj, vec![self.ns], q)?;
        let mi = self.mutual_information(q.table());
        Ok(InnerSolution { value: mi - self.i_us, mutual_information: mi, q, gap, iterations })
    }

    /// Exact minimizer of the convex map `t -> I(p + t dir)` on `[0, max]`,
    /// found by bisection on its derivative.
    fn line_search(&self, p: &[f64], dir: &[f64], max: f64) -> f64 {
        let deriv = |t: f64| {
            let moved: Vec<f64> = p.iter().zip(dir).map(|(a, d)| (a + t * d).max(0.0)).collect();
            self.slopes(&moved).iter().zip(dir).map(|(l, d)| l * d).sum::<f64>()
        };
        if deriv(0.0) >= 0.0 {
            return 0.0;
        }
        if deriv(max) <= 0.0 {
            return max;
        }
        let (mut lo, mut hi) = (0.0, max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * max.max(1e-300) {
                break;
            }
        }
        lo
    }
}

/// The worst memoryless jammer for fixed `(P_{U|S}, x)` and its objective value.
pub fn worst_memoryless_jammer(
    p_us: &ConditionalKernel,
    strategy: &ShannonStrategy,
    spec: &GpChannelSpec,
    opts: &InnerOptions,
) -> Result<InnerSolution> {
    if opts.tol <= 0.0 {
        return Err(Error::Domain("inner tolerance must be positive".into()));
    }
    InnerProblem::from_kernel(spec, strategy, p_us)?.solve(opts, None)
}

/// Minimum of `I(U;Y) - I(U;S)` over every `Q` whose entries are multiples of
/// `1 / resolution`. Returns the value and the grid point.
pub fn inner_grid_minimum(problem: &InnerProblem, resolution: usize) -> (f64, Vec<f64>) {
    let nj = problem.j_size();
    let simplex: Vec<Vec<f64>> = compositions(resolution, &vec![(0, resolution); nj])
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / resolution as f64).collect())
        .collect();
    let ns = problem.s_size();
    let mut digit = vec![0usize; ns];
    let mut best = (f64::INFINITY, Vec::new());
    'outer: loop {
        let q: Vec<f64> = digit.iter().flat_map(|&d| simplex[d].iter().copied()).collect();
        let v = problem.mutual_information(&q);
        if v < best.0 {
            best = (v, q);
        }
        for b in (0..ns).rev() {
            digit[b] += 1;
            if digit[b] < simplex.len() {
                continue 'outer;
            }
            digit[b] = 0;
        }
        break;
    }
    (best.0 - problem.state_information(), best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Distribution;

    fn binary_additive() -> GpChannelSpec {
        let w = ConditionalKernel::from_fn(2, vec![2, 2, 2], |y, c| f64::from(y == c[0] ^ c[1] ^ c[2])).unwrap();
        GpChannelSpec::new(w, Distribution::uniform(2)).unwrap()
    }

    #[test]
    fn binary_additive_jammer_zeroes_information() {
        let spec = binary_additive();
        // x(u, s) = u xor s
        let st = ShannonStrategy::new(2, 2, 2, vec![0, 1, 1, 0]).unwrap();
        let p = ConditionalKernel::uniform(2, vec![2]);
        let sol = worst_memoryless_jammer(&p, &st, &spec, &InnerOptions::default()).unwrap();
        assert!(sol.value.abs() < 1e-7, "{}", sol.value);
        for s in 0..2 {
            assert!((sol.q.prob(1, &[s]) - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn singleton_jammer_needs_no_iterations() {
        let w = ConditionalKernel::from_fn(2, vec![2, 1, 1], |y, c| if y == c[0] { 0.9 } else { 0.1 }).unwrap();
        let spec = GpChannelSpec::new(w, Distribution::uniform(1)).unwrap();
        let st = ShannonStrategy::ignore_state(2, 1);
        let p = ConditionalKernel::uniform(2, vec![1]);
        let sol = worst_memoryless_jammer(&p, &st, &spec, &InnerOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!((sol.value - 0.531_004_406_410_718_8).abs() < 1e-12);
    }

    #[test]
    fn frank_wolfe_beats_or_matches_grid() {
        let w = ConditionalKernel::from_fn(2, vec![2, 2, 2], |y, c| {
            let flip = [0.05, 0.2, 0.35, 0.1][c[1] * 2 + c[2]];
            if y == c[0] {
                1.0 - flip
            } else {
                flip
            }
        })
        .unwrap();
        let spec = GpChannelSpec::new(w, Distribution::new(vec![0.4, 0.6]).unwrap()).unwrap();
        let st = ShannonStrategy::ignore_state(2, 2);
        let p = ConditionalKernel::new(2, vec![2], vec![0.3, 0.7, 0.6, 0.4]).unwrap();
        let prob = InnerProblem::from_kernel(&spec, &st, &p).unwrap();
        let sol = prob.solve(&InnerOptions::default(), None).unwrap();
        let (grid, _) = inner_grid_minimum(&prob, 32);
        assert!(sol.value <= grid + 1e-12);
        assert!(grid - sol.value < 1e-3);
        assert!(sol.gap < 1e-8);
    }
}
