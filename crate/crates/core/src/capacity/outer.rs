//! Outer maximization over `(P_{U|S}, x(u,s))`.

use rand::Rng;
use rand_distr::{Distribution as _, Gamma};
use rayon::prelude::*;

use super::inner::{InnerOptions, InnerProblem};
use super::{GpChannelSpec, ShannonStrategy};
use crate::error::{Error, Result};
use crate::prob::{compositions, ConditionalKernel};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolverConfig {
    /// Auxiliary alphabet size. `None` uses `|X|^|S|` with the table listing
    /// every map `S -> X`; a smaller value enumerates all tables of that size
    /// and gives a lower bound.
    pub u_size: Option<usize>,
    pub starts: usize,
    /// Central-difference step for the outer gradient.
    pub fd_step: f64,
    pub max_ascent_iter: usize,
    /// Stop an ascent once an iteration improves the value by less than this.
    pub ascent_tol: f64,
    /// Perturbed restarts after an ascent stalls.
    pub restarts: usize,
    pub inner: InnerOptions,
    /// Simplex resolution for the grid cross-check, if any.
    pub grid_resolution: Option<usize>,
    /// Skip the grid when it would need more points than this per strategy.
    pub grid_cap: usize,
    pub max_strategies: usize,
    pub seed: u64,
}

impl Default for GpSolverConfig {
    fn default() -> Self {
        Self {
            u_size: None,
            starts: 16,
            fd_step: 1e-5,
            max_ascent_iter: 400,
            ascent_tol: 1e-11,
            restarts: 2,
            inner: InnerOptions::default(),
            grid_resolution: Some(32),
            grid_cap: 20_000,
            max_strategies: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverDiagnostics {
    pub strategies: usize,
    /// Outer ascent iterations summed over all starts.
    pub ascent_iterations: usize,
    /// Inner Frank-Wolfe gap at the reported point.
    pub inner_gap: f64,
    /// Best grid value over all strategies when the grid ran.
    pub grid_value: Option<f64>,
    /// `grid_value - ascent value`; positive means the grid found a better point.
    pub grid_gap: Option<f64>,
    /// Per-task failures; the best remaining result is still returned.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpCapacityResult {
    pub value: f64,
    pub p_us: ConditionalKernel,
    pub strategy: ShannonStrategy,
    pub q: ConditionalKernel,
    pub diagnostics: SolverDiagnostics,
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

fn strategies(spec: &GpChannelSpec, cfg: &GpSolverConfig) -> Result<Vec<ShannonStrategy>> {
    let (nx, ns) = (spec.x_size(), spec.s_size());
    let bound = spec
        .strategy_bound()
        .filter(|&b| b <= cfg.max_strategies)
        .ok_or_else(|| Error::ProblemTooLarge(format!("|X|^|S| = {nx}^{ns} exceeds the strategy guard")))?;
    let k = cfg.u_size.unwrap_or(bound);
    if k == 0 || k > bound {
        return Err(Error::Config(format!("|U| must lie in 1..={bound}")));
    }
    if k == bound {
        return Ok(vec![ShannonStrategy::canonical(nx, ns)?]);
    }
    // Tables up to relabeling of U with distinct rows: k-subsets of the maps S -> X.
    let canonical = ShannonStrategy::canonical(nx, ns)?;
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if out.len() >= cfg.max_strategies {
            return Err(Error::ProblemTooLarge(format!(
                "more than {} strategy tables with |U| = {k}",
                cfg.max_strategies
            )));
        }
        let canonical = &canonical;
        let table = pick.iter().flat_map(|&r| (0..ns).map(move |s| canonical.apply(r, s))).collect();
        out.push(ShannonStrategy::new(k, ns, nx, table)?);
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if pick[i] < bound - k + i {
                pick[i] += 1;
                for t in i + 1..k {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

struct Evaluator<'a> {
    spec: &'a GpChannelSpec,
    strategy: &'a ShannonStrategy,
    opts: InnerOptions,
}

impl Evaluator<'_> {
    fn value(&self, p: &[f64], warm: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
        let prob = InnerProblem::new(self.spec, self.strategy, p)?;
        let sol = prob.solve(&self.opts, warm)?;
        Ok((sol.value, sol.q.table().to_vec()))
    }
}

struct Ascent {
    value: f64,
    p: Vec<f64>,
    iterations: usize,
}

fn random_start<R: Rng>(nu: usize, ns: usize, alpha: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut p = Vec::with_capacity(nu * ns);
    for _ in 0..ns {
        let draw: Vec<f64> = (0..nu).map(|_| gamma.sample(rng).max(1e-300)).collect();
        let total: f64 = draw.iter().sum();
        p.extend(draw.into_iter().map(|x| x / total));
    }
    p
}

fn ascend(ev: &Evaluator, mut p: Vec<f64>, cfg: &GpSolverConfig) -> Result<Ascent> {
    let nu = ev.strategy.u_size();
    let ns = ev.spec.s_size();
    let h = cfg.fd_step;
    let (mut f, mut q) = ev.value(&p, None)?;
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    while iterations < cfg.max_ascent_iter {
        iterations += 1;
        // directional derivatives along e_u - P(.|s), centred per block
        let mut grad = vec![0.0; nu * ns];
        for s in 0..ns {
            let block = &p[s * nu..(s + 1) * nu];
            let mut d = vec![0.0; nu];
            for u in 0..nu {
                let mut plus = p.clone();
                let mut minus = p.clone();
                for v in 0..nu {
                    let e = f64::from(u == v);
                    plus[s * nu + v] = (1.0 - h) * block[v] + h * e;
                    minus[s * nu + v] = (1.0 + h) * block[v] - h * e;
                }
                let fp = ev.value(&plus, Some(&q))?.0;
                d[u] = if block[u] >= h / (1.0 + h) {
                    (fp - ev.value(&minus, Some(&q))?.0) / (2.0 * h)
                } else {
                    (fp - f) / h
                };
            }
            let mean = d.iter().sum::<f64>() / nu as f64;
            for u in 0..nu {
                grad[s * nu + u] = d[u] - mean;
            }
        }
        let mut accepted = None;
        let mut t = (step * 2.0).min(10.0);
        for _ in 0..40 {
            let mut cand = Vec::with_capacity(p.len());
            for s in 0..ns {
                let moved: Vec<f64> = (0..nu).map(|u| p[s * nu + u] + t * grad[s * nu + u]).collect();
                cand.extend(project_simplex(&moved));
            }
            let ascent: f64 = cand.iter().zip(&p).zip(&grad).map(|((c, o), g)| (c - o) * g).sum();
            if ascent <= 0.0 {
                t *= 0.5;
                continue;
            }
            let (fc, qc) = ev.value(&cand, Some(&q))?;
            if fc >= f + 1e-4 * ascent {
                accepted = Some((cand, fc, qc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc, qc)) = accepted else { break };
        let gain = fc - f;
        p = cand;
        f = fc;
        q = qc;
        step = t;
        if gain < cfg.ascent_tol {
            break;
        }
    }
    Ok(Ascent { value: f, p, iterations })
}

fn run_start(ev: &Evaluator, cfg: &GpSolverConfig, strategy_index: usize, start: usize) -> Result<Ascent> {
    let nu = ev.strategy.u_size();
    let ns = ev.spec.s_size();
    let mut rng = stream(cfg.seed, Domain::Solver, ((strategy_index as u64) << 20) | start as u64);
    let p0 = if start == 0 {
        vec![1.0 / nu as f64; nu * ns]
    } else {
        random_start(nu, ns, if start % 2 == 1 { 1.0 } else { 0.3 }, &mut rng)
    };
    let mut best = ascend(ev, p0, cfg)?;
    let mut iterations = best.iterations;
    for _ in 0..cfg.restarts {
        let noise = random_start(nu, ns, 1.0, &mut rng);
        let p: Vec<f64> = best.p.iter().zip(&noise).map(|(a, b)| 0.95 * a + 0.05 * b).collect();
        let again = ascend(ev, p, cfg)?;
        iterations += again.iterations;
        if again.value > best.value + cfg.ascent_tol {
            best = again;
        } else {
            break;
        }
    }
    best.iterations = iterations;
    Ok(best)
}

fn grid_points(nu: usize, ns: usize, resolution: usize, cap: usize) -> Option<Vec<Vec<f64>>> {
    let simplex = compositions(resolution, &vec![(0, resolution); nu]);
    let total = (simplex.len() as f64).powi(ns as i32);
    if total > cap as f64 {
        return None;
    }
    let simplex: Vec<Vec<f64>> =
        simplex.into_iter().map(|c| c.into_iter().map(|k| k as f64 / resolution as f64).collect()).collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut digit = vec![0usize; ns];
    'outer: loop {
        out.push(digit.iter().flat_map(|&d| simplex[d].iter().copied()).collect());
        for b in (0..ns).rev() {
            digit[b] += 1;
            if digit[b] < simplex.len() {
                continue 'outer;
            }
            digit[b] = 0;
        }
        return Some(out);
    }
}

/// Solve the discrete max-min capacity program.
pub fn gp_avc_capacity(spec: &GpChannelSpec, cfg: &GpSolverConfig) -> Result<GpCapacityResult> {
    if cfg.starts == 0 || cfg.fd_step <= 0.0 || cfg.fd_step >= 0.5 {
        return Err(Error::Config("solver needs at least one start and a step in (0, 0.5)".into()));
    }
    let strats = strategies(spec, cfg)?;
    let tasks: Vec<(usize, usize)> = (0..strats.len()).flat_map(|i| (0..cfg.starts).map(move |s| (i, s))).collect();
    let outcomes: Vec<Result<Ascent>> = tasks
        .par_iter()
        .map(|&(i, start)| {
            let ev = Evaluator { spec, strategy: &strats[i], opts: cfg.inner };
            run_start(&ev, cfg, i, start)
        })
        .collect();

    let mut diagnostics = SolverDiagnostics { strategies: strats.len(), ..Default::default() };
    // (value, strategy index, p); ties keep the earliest task
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (&(i, start), out) in tasks.iter().zip(outcomes) {
        match out {
            Ok(a) => {
                diagnostics.ascent_iterations += a.iterations;
                if best.as_ref().is_none_or(|b| a.value > b.0) {
                    best = Some((a.value, i, a.p));
                }
            }
            Err(e) => diagnostics.failures.push(format!("strategy {i} start {start}: {e}")),
        }
    }

    if let Some(res) = cfg.grid_resolution {
        let mut grid_best: Option<(f64, usize, Vec<f64>)> = None;
        for (i, st) in strats.iter().enumerate() {
            let Some(points) = grid_points(st.u_size(), spec.s_size(), res, cfg.grid_cap) else {
                grid_best = None;
                break;
            };
            let ev = Evaluator { spec, strategy: st, opts: cfg.inner };
            let values: Vec<Option<f64>> = points.par_iter().map(|p| ev.value(p, None).ok().map(|v| v.0)).collect();
            for (p, v) in points.into_iter().zip(values) {
                if let Some(v) = v {
                    if grid_best.as_ref().is_none_or(|b| v > b.0) {
                        grid_best = Some((v, i, p));
                    }
                }
            }
        }
        if let Some(g) = grid_best {
            let ascent_value = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);
            diagnostics.grid_value = Some(g.0);
            diagnostics.grid_gap = Some(g.0 - ascent_value);
            if g.0 > ascent_value {
                best = Some(g);
            }
        }
    }

    let (_, i, p) = best.ok_or_else(|| {
        Error::NonConvergence(format!("every outer start failed: {}", diagnostics.failures.join("; ")))
    })?;
    let strategy = strats[i].clone();
    let p_us = ConditionalKernel::new(strategy.u_size(), vec![spec.s_size()], p)?;
    let sol = InnerProblem::from_kernel(spec, &strategy, &p_us)?.solve(&cfg.inner, None)?;
    diagnostics.inner_gap = sol.gap;
    Ok(GpCapacityResult { value: sol.value.max(0.0), p_us, strategy, q: sol.q, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Distribution;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.5, 0.9, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let q = project_simplex(&[2.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    #[test]
    fn reduced_tables_are_subsets_of_maps() {
        let w = ConditionalKernel::uniform(2, vec![2, 3, 1]);
        let spec = GpChannelSpec::new(w, Distribution::uniform(3)).unwrap();
        let cfg = GpSolverConfig { u_size: Some(2), ..Default::default() };
        assert_eq!(strategies(&spec, &cfg).unwrap().len(), 28);
        let cfg = GpSolverConfig { u_size: Some(9), ..Default::default() };
        assert!(strategies(&spec, &cfg).is_err());
    }

    #[test]
    fn useless_channel_has_zero_capacity() {
        let w = ConditionalKernel::from_fn(2, vec![2, 2, 1], |y, c| if y == c[1] { 0.8 } else { 0.2 }).unwrap();
        let spec = GpChannelSpec::new(w, Distribution::uniform(2)).unwrap();
        let cfg = GpSolverConfig { starts: 4, ..Default::default() };
        let r = gp_avc_capacity(&spec, &cfg).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn too_many_strategies_is_rejected() {
        let w = ConditionalKernel::uniform(2, vec![3, 6, 1]);
        let spec = GpChannelSpec::new(w, Distribution::uniform(6)).unwrap();
        assert!(matches!(gp_avc_capacity(&spec, &GpSolverConfig::default()), Err(Error::ProblemTooLarge(_))));
    }
}
