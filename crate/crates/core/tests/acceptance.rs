//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line to
//! the real stdout (not the captured test output) and then asserts.

use std::io::Write;
use std::path::Path;

use avc_sim::adversary::{parse_discrete, parse_gaussian};
use avc_sim::capacity::{
    dp_avc_capacity, gp_avc_capacity, inner_grid_minimum, presets, DpChannelSpec, GpSolverConfig, InnerOptions,
    InnerProblem, ShannonStrategy,
};
use avc_sim::dp_codec::scheme::DpScheme;
use avc_sim::dp_codec::simulate::{simulate_dp, Backend, DpCodeParams, DpSummary};
use avc_sim::experiment::{run, Command, Overrides};
use avc_sim::gp_codec::analysis::impostor_check;
use avc_sim::gp_codec::fixtures::noisy_stuck_at;
use avc_sim::gp_codec::simulate::{plan, simulate_gp, GpCodeParams};
use avc_sim::lemmas::hoeffding::{hoeffding_wor_tail, Urn};
use avc_sim::lemmas::markov::{markov_sweep, MarkovInstance};
use avc_sim::lemmas::sphere_cap::{sphere_cap_montecarlo, Direction};
use avc_sim::stats::chi_square_homogeneity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {id:>2} {:<4} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

fn check(id: u32, name: &str, ok: bool, detail: String) {
    report(id, name, ok, &detail);
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn c01_dp_capacity_closed_form() {
    let t = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (p, l, s): (f64, f64, f64) =
            (rng.random_range(0.01..100.0), rng.random_range(0.0..50.0), rng.random_range(0.01..10.0));
        let want = 0.5 * (1.0 + p / (l + s)).log2();
        for ss in [0.0, 0.3, 1.0, 25.0] {
            let c = dp_avc_capacity(&DpChannelSpec::new(p, l, s, ss).unwrap()).unwrap();
            worst = worst.max((c - want).abs() / want);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(1, "DP capacity closed form", worst <= 1e-12 && secs < 1.0, format!("max rel err {worst:.2e}, {secs:.3} s"));
}

#[test]
fn c02_gp_degenerate_jammer() {
    let cfg = GpSolverConfig::default();
    let stuck = gp_avc_capacity(&presets::stuck_at(0.2).unwrap(), &cfg).unwrap();
    // the grid over P_{U|S} is only affordable with a reduced auxiliary alphabet
    let small = GpSolverConfig { u_size: Some(2), grid_cap: 50_000, ..GpSolverConfig::default() };
    let grid =
        gp_avc_capacity(&presets::stuck_at(0.2).unwrap(), &small).unwrap().diagnostics.grid_value.unwrap_or(f64::NAN);
    let additive = gp_avc_capacity(&presets::binary_additive().unwrap(), &cfg).unwrap();
    let ok = (stuck.value - 0.8).abs() <= 0.01 && (grid - 0.8).abs() <= 0.01 && additive.value.abs() <= 1e-6;
    check(
        2,
        "GP degenerate jammer",
        ok,
        format!("stuck-at {:.6} (grid {grid:.6}), additive {:.2e}", stuck.value, additive.value),
    );
}

fn random_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

#[test]
fn c03_inner_min_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut below = 0;
    for _ in 0..50 {
        let rows: Vec<Vec<f64>> = (0..8).map(|_| random_row(&mut rng, 2)).collect();
        let spec = presets::explicit([2, 2, 2, 2], &rows, random_row(&mut rng, 2)).unwrap();
        let st = ShannonStrategy::canonical(2, 2).unwrap();
        let p_us: Vec<f64> = (0..2).flat_map(|_| random_row(&mut rng, st.u_size())).collect();
        let prob = InnerProblem::new(&spec, &st, &p_us).unwrap();
        let fw = prob.solve(&InnerOptions::default(), None).unwrap().value;
        let (grid, _) = inner_grid_minimum(&prob, 32);
        worst = worst.max((fw - grid).abs());
        below += usize::from(fw <= grid + 1e-12);
    }
    check(3, "inner min vs 1/32 grid", worst <= 1e-3, format!("max |FW - grid| {worst:.2e}, FW <= grid on {below}/50"));
}

const DP_JAMMERS: [&str; 4] = ["gauss_trunc", "state_cancel", "random_dir", "msg_aware+gauss_trunc"];

fn dp_runs() -> Vec<(usize, DpSummary)> {
    let spec = DpChannelSpec::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let rate = 0.5 * dp_avc_capacity(&spec).unwrap();
    let mut out = Vec::new();
    for n in [128, 256, 512] {
        for j in DP_JAMMERS {
            let jammer = parse_gaussian(j, spec.lambda).unwrap();
            let sim = simulate_dp(&spec, n, rate, &DpCodeParams::default(), jammer.as_ref(), 500, 4).unwrap();
            out.push((n, sim.summary));
        }
    }
    out
}

#[test]
fn c04_c05_dp_achievability_and_theta() {
    let runs = dp_runs();
    let at = |n: usize, j: &str| runs.iter().find(|(m, s)| *m == n && s.jammer_id == j).map(|r| &r.1).unwrap();
    let ids: Vec<String> = runs.iter().filter(|r| r.0 == 512).map(|r| r.1.jammer_id.clone()).collect();
    let mut ok4 = true;
    let mut ok5 = true;
    let mut d4 = Vec::new();
    let mut d5 = Vec::new();
    for id in &ids {
        let s = at(512, id);
        ok4 &= s.err_rate <= 0.2;
        let seq: Vec<&DpSummary> = [128, 256, 512].iter().map(|&n| at(n, id)).collect();
        let mono = seq.windows(2).all(|w| w[1].ci_lo <= w[0].ci_hi);
        ok4 &= mono;
        d4.push(format!(
            "{id} {:.3}/{:.3}/{:.3}{}",
            seq[0].err_rate,
            seq[1].err_rate,
            seq[2].err_rate,
            if mono { "" } else { " (increasing)" }
        ));
        ok5 &= s.quantile05_yu >= s.theta - 0.05;
        d5.push(format!("{id} q05 {:.4}", s.quantile05_yu));
    }
    let theta = at(512, &ids[0]).theta;
    report(4, "DP achievability at n=512", ok4, &format!("err by n=128/256/512: {}", d4.join(", ")));
    report(5, "theta uniformity", ok5, &format!("theta {theta:.4}; {}", d5.join(", ")));
    assert!(ok4 && ok5, "criteria 4/5: {d4:?} {d5:?}");
}

#[test]
fn c06_fvw_minimum_at_zero_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut misplaced = 0;
    for _ in 0..20 {
        let spec = DpChannelSpec::new(
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.0..10.0),
        )
        .unwrap();
        let sc = DpScheme::with_default_backoff(spec).unwrap();
        let mut min = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            for k in 0..=200 {
                let (v, w) = (-1.0 + i as f64 / 100.0, (spec.lambda * k as f64 / 200.0).min(spec.lambda));
                let f = sc.fvw(v, w).unwrap();
                if f < min.0 {
                    min = (f, v, w);
                }
            }
        }
        worst = worst.max((min.0 - sc.theta).abs());
        misplaced += usize::from(min.1.abs() > 1e-12 || (min.2 - spec.lambda).abs() > 1e-12);
    }
    check(
        6,
        "f(v,w) grid minimum",
        worst <= 1e-9 && misplaced == 0,
        format!("max |min f - theta| {worst:.2e}, minimiser away from (0, Lambda) in {misplaced}/20"),
    );
}

#[test]
fn c07_gp_list_membership_and_impostors() {
    let d = noisy_stuck_at(0.2, [0.0, 0.1]);
    let worst = d.worst_jammer().unwrap();
    let rate = 0.5 * worst.value;
    let params = GpCodeParams::default();

    let jammer = parse_discrete("worst", d.spec.j_size(), d.spec.s_size(), Some(&worst.q)).unwrap();
    let sim = simulate_gp(&d, 256, rate, &params, jammer.as_ref(), 2000, 7).unwrap();
    let listed = sim.trials.iter().filter(|t| t.in_list).count() as f64 / sim.trials.len() as f64;

    let mut ok = listed >= 0.9;
    let mut detail = vec![format!("membership {listed:.4} at n=256")];
    for n in [64, 128, 256] {
        let info = plan(&d, n, rate, &params, 7).unwrap();
        let c = impostor_check(&d, n, info.delta, info.delta1, info.gamma, 200, 4.0, 1).unwrap();
        ok &= c.holds();
        detail.push(format!("n={n} impostor {:.2e} <= {:.2e}", c.mean_probability, c.bound));
    }
    check(7, "GP list membership and impostors", ok, detail.join(", "));
}

#[test]
fn c08_lemma_bounds() {
    let mut detail = Vec::new();
    let mut ok = true;
    for (i, gamma) in [0.2, 0.5].into_iter().enumerate() {
        for n in [100, 200] {
            let e = sphere_cap_montecarlo(gamma, n, 1_000_000, Direction::Axis, 1, (i * 1000 + n) as u64).unwrap();
            ok &= e.within_bounds();
            detail.push(format!("cap({gamma},{n}) {:.2e} in [{:.2e}, {:.2e}]", e.rate, e.lower, e.upper));
        }
    }
    let sweep =
        markov_sweep(&MarkovInstance::binary_rare_cell(), &[50, 100, 200], 0.02, &[0.03, 0.05, 0.075, 0.1], 20_000, 2)
            .unwrap();
    let k = sweep.chosen().and_then(|d| d.k_hat);
    ok &= k.is_some_and(|k| k > 0.0);
    detail.push(format!("Markov K {k:?}"));
    let urn = Urn::new(1000, 300, 100).unwrap();
    for (i, t) in [0.05, 0.1, 0.15].into_iter().enumerate() {
        let e = hoeffding_wor_tail(urn, t, 100_000, 3, i as u64).unwrap();
        ok &= e.rate <= e.bound;
        detail.push(format!("tail({t}) {:.2e} <= {:.2e}", e.rate, e.bound));
    }
    check(8, "lemma bounds", ok, detail.join(", "));
}

#[test]
fn c09_permutation_homogeneity() {
    let spec = DpChannelSpec::new(1.0, 1.0, 10.0, 0.1).unwrap();
    let n = 256;
    let jammer = parse_gaussian("msg_aware+gauss_trunc", spec.lambda).unwrap();
    let params = DpCodeParams {
        rate_tilde: Some(8.0 / n as f64),
        delta1: Some(0.005),
        backend: Backend::Explicit,
        permute: true,
        ..Default::default()
    };
    let sim = simulate_dp(&spec, n, 4.0 / n as f64, &params, jammer.as_ref(), 16 * 300, 11).unwrap();
    let mut table = vec![vec![0u64; 2]; 16];
    for t in &sim.trials {
        table[(t.m - 1) as usize][usize::from(t.is_error())] += 1;
    }
    let min_trials = table.iter().map(|r| r[0] + r[1]).min().unwrap();
    let (stat, p) = chi_square_homogeneity(&table);
    check(
        9,
        "permutation homogeneity",
        p >= 0.01 && min_trials >= 200,
        format!("err {:.4}, chi2 {stat:.2}, p {p:.4}, min trials/message {min_trials}", sim.summary.err_rate),
    );
}

fn run_into(dir: &Path, command: Command, config: &str, tag: &str, jobs: usize) -> Vec<(String, Vec<u8>)> {
    let conf = dir.join(format!("{tag}.conf"));
    std::fs::write(&conf, config).unwrap();
    let out = dir.join(format!("{tag}-{jobs}"));
    let overrides = Overrides { config: Some(conf), out: Some(out.clone()), jobs: Some(jobs), ..Overrides::default() };
    let outcome = run(command, &overrides).unwrap_or_else(|e| panic!("{tag}: {e}"));
    let mut csv: Vec<(String, Vec<u8>)> = outcome
        .files
        .iter()
        .filter(|f| f.ends_with(".csv"))
        .map(|f| (f.clone(), std::fs::read(out.join(f)).unwrap()))
        .collect();
    csv.sort();
    csv
}

#[test]
fn c10_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (Command::SimulateDp, "seed = 5\ntrials = 200\n[code]\nn = 128\n", "dp"),
        (Command::SimulateGp, "seed = 5\ntrials = 40\n[code]\nn = 64\ncalibration_trials = 100\n", "gp"),
        (Command::Capacity, "[channel]\nkind = discrete\npreset = stuck_at\n", "cap"),
        (Command::Lemmas, "seed = 5\ntrials = 20000\n", "lemmas"),
    ];
    let mut files = 0;
    let mut differ = Vec::new();
    for (cmd, conf, tag) in cases {
        let a = run_into(dir.path(), cmd, conf, tag, 1);
        let b = run_into(dir.path(), cmd, conf, tag, 4);
        files += a.len();
        if a != b || a.is_empty() {
            differ.push(tag);
        }
    }
    check(10, "byte-identical reruns", differ.is_empty(), format!("{files} CSV files compared, differing: {differ:?}"));
}
