//! Executing a prepared experiment. Nothing here touches the filesystem.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::plan::{DiscreteChannel, Experiment, LemmaPlan, RateChoice, Task};
use super::plot::{Plot, Series};
use crate::adversary::{parse_discrete, parse_gaussian};
use crate::capacity::{dp_avc_capacity, gp_avc_capacity, DpChannelSpec, GpCapacityResult, GpSolverConfig};
use crate::csv_fields;
use crate::dp_codec::simulate::{simulate_dp, DpSummary, DpTrial};
use crate::error::Result;
use crate::gp_codec::simulate::{plan as gp_plan, simulate_gp, GpSummary, GpTrial};
use crate::gp_codec::GpDesign;
use crate::lemmas::hoeffding::{hoeffding_wor_tail, Urn};
use crate::lemmas::markov::markov_sweep;
use crate::lemmas::sphere_cap::sphere_cap_montecarlo;
use crate::lemmas::LemmaRecord;
use crate::report::{quote, to_csv, CsvRecord};

/// One file of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Everything a run produces.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Header and rows of the summary table (without trailing newlines).
    pub summary_header: String,
    pub summary_rows: Vec<String>,
    /// Headline numbers, one per series, used by sweeps.
    pub metrics: Vec<(String, f64)>,
    /// Values filled in by the codecs, for the manifest.
    pub derived: Vec<Value>,
    pub plot: Option<Plot>,
}

fn rows_of<T: CsvRecord>(rows: &[T]) -> Vec<String> {
    rows.iter()
        .map(|r| {
            let mut s = String::new();
            r.write_fields(&mut s);
            s
        })
        .collect()
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact { name: name.to_string(), contents }
}

pub fn execute(exp: &Experiment) -> Result<RunOutput> {
    match &exp.task {
        Task::CapacityDp(spec) => capacity_dp(spec),
        Task::CapacityGp { channel, solver } => capacity_gp(channel, solver),
        Task::SimulateDp { spec, ns, rate, params, jammers } => {
            simulate_dp_task(spec, ns, *rate, params, jammers, exp.trials, exp.seed)
        }
        Task::SimulateGp { channel, solver, ns, rate, params, jammers } => {
            simulate_gp_task(channel, solver, ns, *rate, params, jammers, exp.trials, exp.seed)
        }
        Task::Lemmas(plan) => lemmas(plan, exp.trials, exp.seed),
    }
}

const DP_CAPACITY_HEADER: &str = "P,Lambda,sigma2,sigma_S2,capacity";

fn capacity_dp(spec: &DpChannelSpec) -> Result<RunOutput> {
    let c = dp_avc_capacity(spec)?;
    let mut row = String::new();
    csv_fields!(&mut row, spec.power, spec.lambda, spec.noise_var, spec.state_var, c);
    Ok(RunOutput {
        artifacts: vec![artifact("capacity.csv", format!("{DP_CAPACITY_HEADER}\n{row}\n"))],
        summary_header: DP_CAPACITY_HEADER.into(),
        summary_rows: vec![row],
        metrics: vec![("capacity".into(), c)],
        ..RunOutput::default()
    })
}

const GP_CAPACITY_HEADER: &str =
    "channel,capacity,u_size,strategies,ascent_iterations,inner_gap,grid_value,grid_gap,failures";

fn gp_row(label: &str, r: &GpCapacityResult) -> String {
    let d = &r.diagnostics;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut row = String::new();
    csv_fields!(
        &mut row,
        quote(label),
        r.value,
        r.strategy.u_size(),
        d.strategies,
        d.ascent_iterations,
        d.inner_gap,
        opt(d.grid_value),
        opt(d.grid_gap),
        d.failures.len(),
    );
    row
}

/// Human-readable account of the optimizing design.
fn gp_report(label: &str, spec: &crate::capacity::GpChannelSpec, r: &GpCapacityResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "channel {label}: |X| = {}, |S| = {}, |J| = {}, |Y| = {}",
        spec.x_size(),
        spec.s_size(),
        spec.j_size(),
        spec.y_size()
    );
    let _ = writeln!(s, "capacity {:.6} bits per use", r.value);
    let _ = writeln!(s, "\nP(u | s) and x(u, s):");
    for st in 0..spec.s_size() {
        let _ = write!(s, "  s={st}:");
        for u in 0..r.strategy.u_size() {
            let p = r.p_us.prob(u, &[st]);
            if p > 1e-9 {
                let _ = write!(s, "  u={u} p={p:.4} x={}", r.strategy.apply(u, st));
            }
        }
        s.push('\n');
    }
    let _ = writeln!(s, "\nminimizing jammer Q(j | s):");
    for st in 0..spec.s_size() {
        let row: Vec<String> = (0..spec.j_size()).map(|j| format!("{:.4}", r.q.prob(j, &[st]))).collect();
        let _ = writeln!(s, "  s={st}: {}", row.join(" "));
    }
    let d = &r.diagnostics;
    let _ = writeln!(s, "\nstrategies searched {}, inner gap {:.2e}", d.strategies, d.inner_gap);
    if let (Some(v), Some(g)) = (d.grid_value, d.grid_gap) {
        let _ = writeln!(s, "grid check value {v:.6} (gap {g:.2e})");
    }
    for f in &d.failures {
        let _ = writeln!(s, "failure: {f}");
    }
    s
}

fn capacity_gp(channel: &DiscreteChannel, solver: &GpSolverConfig) -> Result<RunOutput> {
    let r = gp_avc_capacity(&channel.spec, solver)?;
    let row = gp_row(&channel.label, &r);
    Ok(RunOutput {
        artifacts: vec![
            artifact("capacity.csv", format!("{GP_CAPACITY_HEADER}\n{row}\n")),
            artifact("capacity_report.txt", gp_report(&channel.label, &channel.spec, &r)),
        ],
        summary_header: GP_CAPACITY_HEADER.into(),
        summary_rows: vec![row],
        metrics: vec![("capacity".into(), r.value)],
        ..RunOutput::default()
    })
}

fn resolve_rate(choice: RateChoice, capacity: f64) -> f64 {
    match choice {
        RateChoice::Absolute(r) => r,
        RateChoice::Fraction(f) => f * capacity,
    }
}

fn error_rate_plot(title: &str, summaries: &[(usize, String, f64)]) -> Plot {
    let mut series: Vec<Series> = Vec::new();
    for (n, id, rate) in summaries {
        match series.iter_mut().find(|s| &s.label == id) {
            Some(s) => s.points.push((*n as f64, *rate)),
            None => series.push(Series { label: id.clone(), points: vec![(*n as f64, *rate)] }),
        }
    }
    Plot { title: title.into(), x_label: "block length n".into(), y_label: "error rate".into(), series }
}

#[allow(clippy::too_many_arguments)]
fn simulate_dp_task(
    spec: &DpChannelSpec,
    ns: &[usize],
    rate: RateChoice,
    params: &crate::dp_codec::simulate::DpCodeParams,
    jammers: &[String],
    trials: u64,
    seed: u64,
) -> Result<RunOutput> {
    let capacity = dp_avc_capacity(spec)?;
    let rate = resolve_rate(rate, capacity);
    let mut all_trials: Vec<DpTrial> = Vec::new();
    let mut summaries: Vec<DpSummary> = Vec::new();
    let mut derived = Vec::new();
    for &n in ns {
        for spec_str in jammers {
            let jammer = parse_gaussian(spec_str, spec.lambda)?;
            let sim = simulate_dp(spec, n, rate, params, jammer.as_ref(), trials, seed)?;
            let i = sim.info;
            derived.push(json!({
                "kind": "code",
                "n": n,
                "jammer": spec_str,
                "capacity": capacity,
                "rate": i.rate,
                "rate_tilde": i.rate_tilde,
                "eps1": i.scheme.eps1,
                "alpha": i.scheme.alpha,
                "theta": i.scheme.theta,
                "delta1": i.delta1,
                "bins": i.bins,
                "per_bin": i.per_bin,
                "backend": format!("{:?}", i.backend).to_lowercase(),
            }));
            all_trials.extend(sim.trials);
            summaries.push(sim.summary);
        }
    }
    let points: Vec<(usize, String, f64)> = summaries.iter().map(|s| (s.n, s.jammer_id.clone(), s.err_rate)).collect();
    Ok(RunOutput {
        artifacts: vec![artifact("trials.csv", to_csv(&all_trials)), artifact("summary.csv", to_csv(&summaries))],
        summary_header: DpSummary::header().into(),
        summary_rows: rows_of(&summaries),
        metrics: points.iter().map(|(n, id, r)| (format!("n={n} {id}"), *r)).collect(),
        derived,
        plot: Some(error_rate_plot("dirty-paper code", &points)),
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_gp_task(
    channel: &DiscreteChannel,
    solver: &GpSolverConfig,
    ns: &[usize],
    rate: RateChoice,
    params: &crate::gp_codec::simulate::GpCodeParams,
    jammers: &[String],
    trials: u64,
    seed: u64,
) -> Result<RunOutput> {
    let cap = gp_avc_capacity(&channel.spec, solver)?;
    let design = GpDesign::from_capacity(channel.spec.clone(), &cap)?;
    let worst = design.worst_jammer()?.q;
    let rate = resolve_rate(rate, cap.value);
    let (nj, n_states) = (channel.spec.j_size(), channel.spec.s_size());
    let mut all_trials: Vec<GpTrial> = Vec::new();
    let mut summaries: Vec<GpSummary> = Vec::new();
    let mut derived = Vec::new();
    for &n in ns {
        // calibrate once per block length and share the result across jammers
        let info = gp_plan(&design, n, rate, params, seed)?;
        let fixed = crate::gp_codec::simulate::GpCodeParams {
            delta: Some(info.delta),
            delta1: Some(info.delta1),
            gamma: Some(info.gamma),
            rate_tilde: Some(info.rate_tilde),
            ..params.clone()
        };
        derived.push(json!({
            "kind": "code",
            "n": n,
            "capacity": cap.value,
            "design_rate": info.design_rate,
            "state_information": info.state_information,
            "rate": info.rate,
            "rate_tilde": info.rate_tilde,
            "delta": info.delta,
            "delta1": info.delta1,
            "gamma": info.gamma,
            "bins": info.bins,
            "per_bin": info.per_bin,
            "backend": format!("{:?}", info.backend).to_lowercase(),
        }));
        for spec_str in jammers {
            let jammer = parse_discrete(spec_str, nj, n_states, Some(&worst))?;
            let sim = simulate_gp(&design, n, rate, &fixed, jammer.as_ref(), trials, seed)?;
            all_trials.extend(sim.trials);
            summaries.push(sim.summary);
        }
    }
    let points: Vec<(usize, String, f64)> = summaries.iter().map(|s| (s.n, s.jammer_id.clone(), s.err_rate)).collect();
    Ok(RunOutput {
        artifacts: vec![artifact("trials.csv", to_csv(&all_trials)), artifact("summary.csv", to_csv(&summaries))],
        summary_header: GpSummary::header().into(),
        summary_rows: rows_of(&summaries),
        metrics: points.iter().map(|(n, id, r)| (format!("n={n} {id}"), *r)).collect(),
        derived,
        plot: Some(error_rate_plot(&format!("binned code on {}", channel.label), &points)),
    })
}

fn lemmas(plan: &LemmaPlan, trials: u64, seed: u64) -> Result<RunOutput> {
    let mut records: Vec<LemmaRecord> = Vec::new();
    let mut derived = Vec::new();
    // experiment points are numbered per lemma so adding one lemma does not
    // change the draws of another
    let mut point = 0u64;
    let wants = |name: &str| plan.which.iter().any(|w| w == name);
    if wants("sphere_cap") {
        for &gamma in &plan.sphere_gamma {
            for &n in &plan.sphere_n {
                let est = sphere_cap_montecarlo(gamma, n, trials, plan.sphere_direction, seed, point)?;
                point += 1;
                records.push(est.record());
            }
        }
    }
    if wants("markov") {
        let sweep =
            markov_sweep(&plan.markov, &plan.markov_n, plan.markov_delta0, &plan.markov_delta, trials, seed ^ 1)?;
        for d in &sweep.decays {
            records.extend(d.records(&plan.markov, plan.markov_delta0));
        }
        derived.push(json!({
            "kind": "markov",
            "instance": plan.markov.label,
            "chosen_delta": sweep.chosen().map(|d| d.delta),
            "k_hat": sweep.chosen().and_then(|d| d.k_hat),
        }));
    }
    if wants("hoeffding") {
        let (population, ones, sample) = plan.hoeffding;
        let urn = Urn::new(population, ones, sample)?;
        for (i, &t) in plan.hoeffding_t.iter().enumerate() {
            let est = hoeffding_wor_tail(urn, t, trials, seed ^ 2, i as u64)?;
            records.push(est.record(sample));
        }
    }
    let metrics = records.iter().map(|r| (format!("{} n={} {}", r.lemma_id, r.n, r.params), r.rate)).collect();
    Ok(RunOutput {
        artifacts: vec![artifact("lemmas.csv", to_csv(&records))],
        summary_header: LemmaRecord::header().into(),
        summary_rows: rows_of(&records),
        metrics,
        derived,
        plot: None,
    })
}
