//! Turning a [`Config`] into a validated experiment. Everything that can be
//! checked without running the experiment is checked here, so a bad config
//! fails before any output is written.

use super::config::{Config, Source};
use super::Mode;
use crate::adversary::{parse_discrete, parse_gaussian};
use crate::capacity::{presets, DpChannelSpec, GpChannelSpec, GpSolverConfig};
use crate::dp_codec::simulate::{Backend, DpCodeParams};
use crate::error::{Error, Result};
use crate::gp_codec::list::ListMode;
use crate::gp_codec::simulate::GpCodeParams;
use crate::lemmas::markov::MarkovInstance;
use crate::lemmas::sphere_cap::Direction;
use crate::prob::ConditionalKernel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateChoice {
    Absolute(f64),
    /// Fraction of the channel's capacity.
    Fraction(f64),
}

#[derive(Debug, Clone)]
pub struct DiscreteChannel {
    pub label: String,
    pub spec: GpChannelSpec,
}

#[derive(Debug, Clone)]
pub struct LemmaPlan {
    pub which: Vec<String>,
    pub sphere_gamma: Vec<f64>,
    pub sphere_n: Vec<usize>,
    pub sphere_direction: Direction,
    pub markov: MarkovInstance,
    pub markov_n: Vec<usize>,
    pub markov_delta0: f64,
    pub markov_delta: Vec<f64>,
    pub hoeffding: (usize, usize, usize),
    pub hoeffding_t: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum Task {
    CapacityDp(DpChannelSpec),
    CapacityGp {
        channel: DiscreteChannel,
        solver: GpSolverConfig,
    },
    SimulateDp {
        spec: DpChannelSpec,
        ns: Vec<usize>,
        rate: RateChoice,
        params: DpCodeParams,
        jammers: Vec<String>,
    },
    SimulateGp {
        channel: DiscreteChannel,
        solver: GpSolverConfig,
        ns: Vec<usize>,
        rate: RateChoice,
        params: GpCodeParams,
        jammers: Vec<String>,
    },
    Lemmas(LemmaPlan),
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub mode: Mode,
    pub seed: u64,
    pub trials: u64,
    pub task: Task,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Errors from constructors count as configuration errors at this stage.
fn as_config<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) => config_err(format!("{what}: {m}")),
        other => config_err(format!("{what}: {other}")),
    })
}

fn dp_channel(cfg: &Config) -> Result<DpChannelSpec> {
    as_config(
        "channel",
        DpChannelSpec::new(
            cfg.f64("channel.power")?,
            cfg.f64("channel.lambda")?,
            cfg.f64("channel.noise_var")?,
            cfg.f64("channel.state_var")?,
        ),
    )
}

fn parse_rows(raw: &str) -> Result<Vec<Vec<f64>>> {
    raw.split(';')
        .map(|row| {
            row.split('/')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| config_err(format!("channel.w entry '{}': {e}", v.trim())))
                })
                .collect()
        })
        .collect()
}

fn discrete_channel(cfg: &Config) -> Result<DiscreteChannel> {
    let preset = cfg.text("channel.preset")?.to_string();
    let spec = match preset.as_str() {
        "stuck_at" => as_config("channel", presets::stuck_at(cfg.f64("channel.p")?))?,
        "binary_additive" => as_config("channel", presets::binary_additive())?,
        "noisy_stuck_at" => {
            let noise = cfg.f64s("channel.noise")?;
            let noise: [f64; 2] = noise
                .try_into()
                .map_err(|v: Vec<f64>| config_err(format!("channel.noise needs 2 entries, got {}", v.len())))?;
            as_config("channel", presets::noisy_stuck_at(cfg.f64("channel.p")?, noise))?
        }
        "explicit" => {
            let sizes = [
                cfg.usize("channel.x_size")?,
                cfg.usize("channel.s_size")?,
                cfg.usize("channel.j_size")?,
                cfg.usize("channel.y_size")?,
            ];
            let rows = parse_rows(cfg.text("channel.w")?)?;
            as_config("channel", presets::explicit(sizes, &rows, cfg.f64s("channel.p_s")?))?
        }
        other => {
            return Err(config_err(format!(
                "unknown channel.preset '{other}' (stuck_at, binary_additive, noisy_stuck_at, explicit)"
            )))
        }
    };
    Ok(DiscreteChannel { label: preset, spec })
}

fn solver_config(cfg: &Config, seed: u64) -> Result<GpSolverConfig> {
    let grid = cfg.usize("solver.grid_resolution")?;
    let starts = cfg.usize("solver.starts")?;
    if starts == 0 {
        return Err(config_err("solver.starts must be positive"));
    }
    Ok(GpSolverConfig {
        u_size: cfg.opt_u64("solver.u_size").map(|u| u as usize),
        starts,
        restarts: cfg.usize("solver.restarts")?,
        grid_resolution: (grid > 0).then_some(grid),
        seed,
        ..GpSolverConfig::default()
    })
}

fn block_lengths(cfg: &Config) -> Result<Vec<usize>> {
    let ns = cfg.usizes("code.n")?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(config_err("code.n needs at least one positive block length"));
    }
    Ok(ns)
}

fn rate_choice(cfg: &Config) -> Result<RateChoice> {
    match cfg.opt_f64("code.rate") {
        Some(r) if r < 0.0 => Err(config_err(format!("code.rate must be nonnegative, got {r}"))),
        Some(r) => Ok(RateChoice::Absolute(r)),
        None => {
            let f = cfg.f64("code.rate_fraction")?;
            if f < 0.0 {
                return Err(config_err(format!("code.rate_fraction must be nonnegative, got {f}")));
            }
            Ok(RateChoice::Fraction(f))
        }
    }
}

fn positive(cfg: &Config, key: &str) -> Result<Option<f64>> {
    match cfg.opt_f64(key) {
        Some(v) if v <= 0.0 => Err(config_err(format!("{key} must be positive, got {v}"))),
        v => Ok(v),
    }
}

fn nonnegative(cfg: &Config, key: &str) -> Result<Option<f64>> {
    match cfg.opt_f64(key) {
        Some(v) if v < 0.0 => Err(config_err(format!("{key} must be nonnegative, got {v}"))),
        v => Ok(v),
    }
}

fn probability(cfg: &Config, key: &str) -> Result<f64> {
    let v = cfg.f64(key)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(config_err(format!("{key} must lie in (0, 1), got {v}")))
    }
}

fn backend(cfg: &Config) -> Result<Backend> {
    cfg.text("code.backend")?.parse()
}

fn dp_params(cfg: &Config) -> Result<DpCodeParams> {
    Ok(DpCodeParams {
        eps1: positive(cfg, "code.eps1")?,
        delta1: positive(cfg, "code.delta1")?,
        eps: nonnegative(cfg, "code.eps")?.unwrap_or_default(),
        rate_tilde: nonnegative(cfg, "code.rate_tilde")?,
        backend: backend(cfg)?,
        permute: cfg.bool("code.permute")?,
        memory_cap: cfg.u64("code.memory_cap")?,
        threshold_slack: nonnegative(cfg, "code.threshold_slack")?.unwrap_or_default(),
    })
}

fn gp_params(cfg: &Config) -> Result<GpCodeParams> {
    let calibration_trials = cfg.u64("code.calibration_trials")?;
    if calibration_trials == 0 {
        return Err(config_err("code.calibration_trials must be positive"));
    }
    Ok(GpCodeParams {
        delta: positive(cfg, "code.delta")?,
        delta1: positive(cfg, "code.delta1")?,
        gamma: positive(cfg, "code.gamma")?,
        calibration_trials,
        calibration_quantile: probability(cfg, "code.calibration_quantile")?,
        calibration_kernel: None,
        lp_tol: positive(cfg, "code.lp_tol")?.unwrap_or_default(),
        mode: cfg.text("code.list_mode")?.parse::<ListMode>()?,
        rate_tilde: nonnegative(cfg, "code.rate_tilde")?,
        encoder_failure: probability(cfg, "code.encoder_failure")?,
        backend: backend(cfg)?,
        permute: cfg.bool("code.permute")?,
        memory_cap: cfg.u64("code.memory_cap")?,
    })
}

fn lemma_plan(cfg: &Config) -> Result<LemmaPlan> {
    let which = cfg.texts("lemmas.which")?;
    for w in &which {
        if !["sphere_cap", "markov", "hoeffding"].contains(&w.as_str()) {
            return Err(config_err(format!("unknown lemma '{w}' (sphere_cap, markov, hoeffding)")));
        }
    }
    let sphere_gamma = cfg.f64s("lemmas.sphere_gamma")?;
    if let Some(g) = sphere_gamma.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
        return Err(config_err(format!("lemmas.sphere_gamma entries must lie in (0, 1), got {g}")));
    }
    let sphere_n = cfg.usizes("lemmas.sphere_n")?;
    if sphere_n.iter().any(|&n| n < 2) {
        return Err(config_err("lemmas.sphere_n entries must be at least 2"));
    }
    let sphere_direction = match cfg.text("lemmas.sphere_direction")? {
        "axis" => Direction::Axis,
        "diagonal" => Direction::Diagonal,
        other => return Err(config_err(format!("unknown lemmas.sphere_direction '{other}' (axis, diagonal)"))),
    };
    let markov = match cfg.text("lemmas.markov_instance")? {
        "binary" => MarkovInstance::binary(),
        "binary_rare_cell" => MarkovInstance::binary_rare_cell(),
        other => {
            return Err(config_err(format!("unknown lemmas.markov_instance '{other}' (binary, binary_rare_cell)")))
        }
    };
    let markov_n = cfg.usizes("lemmas.markov_n")?;
    if markov_n.contains(&0) {
        return Err(config_err("lemmas.markov_n entries must be positive"));
    }
    let mut markov_delta = cfg.f64s("lemmas.markov_delta")?;
    if markov_delta.iter().any(|d| *d <= 0.0) {
        return Err(config_err("lemmas.markov_delta entries must be positive"));
    }
    markov_delta.sort_by(f64::total_cmp);
    let hoeffding = (
        cfg.usize("lemmas.hoeffding_population")?,
        cfg.usize("lemmas.hoeffding_ones")?,
        cfg.usize("lemmas.hoeffding_sample")?,
    );
    as_config("lemmas.hoeffding", crate::lemmas::hoeffding::Urn::new(hoeffding.0, hoeffding.1, hoeffding.2))?;
    let hoeffding_t = cfg.f64s("lemmas.hoeffding_t")?;
    if hoeffding_t.iter().any(|t| *t <= 0.0) {
        return Err(config_err("lemmas.hoeffding_t entries must be positive"));
    }
    Ok(LemmaPlan {
        which,
        sphere_gamma,
        sphere_n,
        sphere_direction,
        markov,
        markov_n,
        markov_delta0: nonnegative(cfg, "lemmas.markov_delta0")?.unwrap_or_default(),
        markov_delta,
        hoeffding,
        hoeffding_t,
    })
}

/// Channel kind implied by the mode; a conflicting `channel.kind` is an error.
fn check_kind(cfg: &mut Config, mode: Mode) -> Result<()> {
    let want = if mode.is_discrete() { "discrete" } else { "gaussian" };
    match cfg.opt_text("channel.kind") {
        Some(k) if k != want && mode != Mode::Lemmas => {
            Err(config_err(format!("channel.kind = {k} does not fit mode {}", mode.name())))
        }
        _ => cfg.fill("channel.kind", want),
    }
}

/// Validate `cfg` for `mode`, filling mode-dependent defaults into it.
pub fn prepare(cfg: &mut Config, mode: Mode) -> Result<Experiment> {
    if let Some(m) = cfg.opt_text("mode").filter(|m| *m != mode.name()) {
        return Err(config_err(format!("config mode '{m}' does not match the command ({})", mode.name())));
    }
    cfg.fill("mode", mode.name())?;
    check_kind(cfg, mode)?;
    let seed = cfg.u64("seed")?;
    let trials = cfg.u64("trials")?;
    if trials == 0 {
        return Err(config_err("trials must be positive"));
    }
    if cfg.contains("code.rate") && cfg.entries().get("code.rate_fraction").is_some_and(|e| e.source != Source::Default)
    {
        return Err(config_err("give code.rate or code.rate_fraction, not both"));
    }
    let task = match mode {
        Mode::CapacityDp => Task::CapacityDp(dp_channel(cfg)?),
        Mode::CapacityGp => Task::CapacityGp { channel: discrete_channel(cfg)?, solver: solver_config(cfg, seed)? },
        Mode::SimulateDp => {
            let spec = dp_channel(cfg)?;
            if !cfg.contains("jammer.spec") {
                cfg.fill("jammer.spec", "gauss_trunc")?;
            }
            let jammers = cfg.repeated("jammer.spec");
            for j in &jammers {
                as_config("jammer", parse_gaussian(j, spec.lambda))?;
            }
            Task::SimulateDp {
                spec,
                ns: block_lengths(cfg)?,
                rate: rate_choice(cfg)?,
                params: dp_params(cfg)?,
                jammers,
            }
        }
        Mode::SimulateGp => {
            let channel = discrete_channel(cfg)?;
            // the full |X|^|S| alphabet makes joint types too many to enumerate
            cfg.fill("solver.u_size", &channel.spec.x_size().to_string())?;
            if !cfg.contains("jammer.spec") {
                cfg.fill("jammer.spec", "worst")?;
            }
            let jammers = cfg.repeated("jammer.spec");
            let (nj, ns) = (channel.spec.j_size(), channel.spec.s_size());
            let placeholder = ConditionalKernel::uniform(nj, vec![ns]);
            for j in &jammers {
                as_config("jammer", parse_discrete(j, nj, ns, Some(&placeholder)))?;
            }
            Task::SimulateGp {
                channel,
                solver: solver_config(cfg, seed)?,
                ns: block_lengths(cfg)?,
                rate: rate_choice(cfg)?,
                params: gp_params(cfg)?,
                jammers,
            }
        }
        Mode::Lemmas => Task::Lemmas(lemma_plan(cfg)?),
    };
    Ok(Experiment { mode, seed, trials, task })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepared(text: &str, mode: Mode) -> Result<Experiment> {
        let mut c = Config::parse(text)?;
        c.fill_defaults();
        prepare(&mut c, mode)
    }

    #[test]
    fn defaults_make_a_valid_experiment_for_every_mode() {
        for mode in Mode::ALL {
            prepared("", mode).unwrap();
        }
    }

    #[test]
    fn validation_failures_are_config_errors() {
        for (text, mode) in [
            ("[channel]\npower = -1\n", Mode::CapacityDp),
            ("[channel]\npreset = nothing\n", Mode::CapacityGp),
            ("[channel]\np = 1.5\n", Mode::SimulateGp),
            ("[channel]\nnoise = 0.1\n", Mode::SimulateGp),
            ("[code]\nrate = 0.1\nrate_fraction = 0.2\n", Mode::SimulateDp),
            ("[code]\nn = 0\n", Mode::SimulateDp),
            ("[code]\nbackend = disk\n", Mode::SimulateDp),
            ("[code]\nlist_mode = psychic\n", Mode::SimulateGp),
            ("[jammer]\nspec = laser\n", Mode::SimulateDp),
            ("[jammer]\nspec = constant:j=5\n", Mode::SimulateGp),
            ("[channel]\nkind = discrete\n", Mode::SimulateDp),
            ("[lemmas]\nwhich = chernoff\n", Mode::Lemmas),
            ("[lemmas]\nhoeffding_ones = 5000\n", Mode::Lemmas),
            ("trials = 0\n", Mode::Lemmas),
            ("[channel]\npreset = explicit\nx_size = 2\n", Mode::CapacityGp),
        ] {
            assert!(matches!(prepared(text, mode), Err(Error::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn explicit_channel_from_text() {
        let text = "[channel]\npreset = explicit\nx_size = 2\ns_size = 1\nj_size = 1\ny_size = 2\nw = 0.9/0.1; 0.1/0.9\np_s = 1\n";
        let e = prepared(text, Mode::CapacityGp).unwrap();
        let Task::CapacityGp { channel, .. } = e.task else { panic!() };
        assert_eq!(channel.spec.w(1, 0, 0, 0), 0.1);
    }

    #[test]
    fn mode_dependent_defaults_are_recorded() {
        let mut c = Config::parse("").unwrap();
        c.fill_defaults();
        prepare(&mut c, Mode::SimulateGp).unwrap();
        assert_eq!(c.repeated("jammer.spec"), vec!["worst"]);
        assert_eq!(c.text("channel.kind").unwrap(), "discrete");
        assert_eq!(c.text("mode").unwrap(), "simulate-gp");
    }
}
