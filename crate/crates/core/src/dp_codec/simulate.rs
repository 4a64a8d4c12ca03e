//! Monte Carlo harness for the dirty-paper code.

use rand::Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;

use super::codebook::{count_for_rate, DpEncoding, SphereCodebook, MEMORY_CAP};
use super::ensemble::{EnsembleCode, MAX_LABEL};
use super::scheme::{DpScheme, DEFAULT_RATE_SLACK};
use super::sphere::{dot, norm_sq};
use crate::adversary::{check_power, AdversaryRng, GaussianJammer, PublicCodeParams};
use crate::capacity::DpChannelSpec;
use crate::csv_fields;
use crate::error::{Error, Result};
use crate::permutation::MessagePermutation;
use crate::report::{quote, CsvRecord};
use crate::rng::{stream, Domain};
use crate::stats::{quantile, wilson95};

/// How codewords are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Explicit when the codebook fits in memory, ensemble otherwise.
    #[default]
    Auto,
    Explicit,
    Ensemble,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Backend::Auto),
            "explicit" => Ok(Backend::Explicit),
            "ensemble" => Ok(Backend::Ensemble),
            other => Err(Error::Config(format!("unknown backend '{other}' (auto, explicit, ensemble)"))),
        }
    }
}

/// Code construction knobs. `None` fields take the scheme defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpCodeParams {
    pub eps1: Option<f64>,
    pub delta1: Option<f64>,
    /// Rate slack in the default `R~`.
    pub eps: f64,
    pub rate_tilde: Option<f64>,
    pub backend: Backend,
    pub permute: bool,
    pub memory_cap: u64,
    /// `delta` in the `theta - delta` threshold used for error attribution.
    pub threshold_slack: f64,
}

impl Default for DpCodeParams {
    fn default() -> Self {
        Self {
            eps1: None,
            delta1: None,
            eps: DEFAULT_RATE_SLACK,
            rate_tilde: None,
            backend: Backend::Auto,
            permute: false,
            memory_cap: MEMORY_CAP,
            threshold_slack: 0.05,
        }
    }
}

/// The code actually used, after defaults and rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpRunInfo {
    pub scheme: DpScheme,
    pub delta1: f64,
    pub rate: f64,
    pub rate_tilde: f64,
    pub bins: f64,
    pub per_bin: f64,
    pub messages: u64,
    pub backend: Backend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpTrial {
    pub trial: u64,
    pub n: usize,
    pub rate: f64,
    pub rate_tilde: f64,
    pub jammer_id: String,
    pub encoder_fallback: bool,
    pub m: u64,
    pub mhat: u64,
    pub error_type: &'static str,
    /// `<Y^, U^>`, zero when `y = 0`.
    pub yu_cosine: f64,
    /// `||U - alpha S||^2 / n`, before the zero-vector fallback.
    pub power_x: f64,
    /// The zero vector was sent because `U - alpha S` exceeded the power budget.
    pub zero_fallback: bool,
    pub jammer_power: f64,
    /// `|<J,U> - <J,S^><S^,U>| / n`.
    pub orthogonality: f64,
    /// Largest cosine of `y` with a codeword outside the transmitted bin.
    pub impostor_cosine: f64,
}

impl DpTrial {
    pub fn is_error(&self) -> bool {
        self.mhat != self.m
    }
}

impl CsvRecord for DpTrial {
    fn header() -> &'static str {
        "trial,n,R,Rtilde,jammer_id,encoder_fallback,decoded,m,mhat,error_type,yu_cosine,power_x,fallback,jammer_power"
    }

    fn write_fields(&self, out: &mut String) {
        csv_fields!(
            out,
            self.trial,
            self.n,
            self.rate,
            self.rate_tilde,
            quote(&self.jammer_id),
            self.encoder_fallback as u8,
            (self.mhat != 0) as u8,
            self.m,
            self.mhat,
            self.error_type,
            self.yu_cosine,
            self.power_x,
            self.zero_fallback as u8,
            self.jammer_power,
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpSummary {
    pub n: usize,
    pub rate: f64,
    pub jammer_id: String,
    pub trials: u64,
    pub errors: u64,
    pub err_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub theta: f64,
    pub quantile05_yu: f64,
}

impl CsvRecord for DpSummary {
    fn header() -> &'static str {
        "n,R,jammer_id,trials,errors,err_rate,ci_lo,ci_hi,theta,quantile05_yu"
    }

    fn write_fields(&self, out: &mut String) {
        csv_fields!(
            out,
            self.n,
            self.rate,
            quote(&self.jammer_id),
            self.trials,
            self.errors,
            self.err_rate,
            self.ci_lo,
            self.ci_hi,
            self.theta,
            self.quantile05_yu,
        );
    }
}

#[derive(Debug, Clone)]
pub struct DpSimulation {
    pub info: DpRunInfo,
    pub trials: Vec<DpTrial>,
    pub summary: DpSummary,
}

enum Code {
    Explicit(SphereCodebook),
    Ensemble(EnsembleCode),
}

/// Resolve defaults and pick the backend.
pub fn plan(spec: &DpChannelSpec, n: usize, rate: f64, params: &DpCodeParams) -> Result<DpRunInfo> {
    if n == 0 {
        return Err(Error::Config("block length must be positive".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::Config(format!("rate must be nonnegative, got {rate}")));
    }
    let scheme = match params.eps1 {
        Some(e) => DpScheme::new(*spec, e)?,
        None => DpScheme::with_default_backoff(*spec)?,
    };
    let delta1 = params.delta1.unwrap_or_else(|| scheme.default_delta1());
    if !(delta1 > 0.0) {
        return Err(Error::Config(format!("delta1 must be positive, got {delta1}")));
    }
    let rate_tilde = params.rate_tilde.unwrap_or_else(|| scheme.rate_tilde(params.eps));
    let bins = count_for_rate(n, rate);
    let per_bin = count_for_rate(n, rate_tilde);
    let fits = n as f64 * bins * per_bin <= params.memory_cap as f64;
    let backend = match params.backend {
        Backend::Auto if fits => Backend::Explicit,
        Backend::Auto => Backend::Ensemble,
        b => b,
    };
    if backend == Backend::Explicit && !fits {
        return Err(Error::CodebookTooLarge { entries: n as f64 * bins * per_bin, cap: params.memory_cap });
    }
    if backend == Backend::Ensemble && n < 4 {
        return Err(Error::Config("the ensemble backend needs n >= 4".into()));
    }
    let messages = bins.min(MAX_LABEL) as u64;
    Ok(DpRunInfo {
        scheme,
        delta1,
        rate: bins.log2() / n as f64,
        rate_tilde: per_bin.log2() / n as f64,
        bins,
        per_bin,
        messages,
        backend,
    })
}

fn gaussian_vec<R: Rng + ?Sized>(n: usize, var: f64, rng: &mut R) -> Vec<f64> {
    if var == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Uniform message in `1..=messages` other than `m`.
fn other_message<R: Rng + ?Sized>(messages: u64, m: u64, rng: &mut R) -> u64 {
    let r = rng.random_range(1..messages);
    if r >= m {
        r + 1
    } else {
        r
    }
}

/// Run `trials` independent blocks. Trial `t` draws the message, state and
/// noise from the channel stream `t`, the encoder's choices and the message
/// permutation from the shared stream `t`, and the jammer's randomness from the
/// adversary stream `t`. The explicit codebook comes from the codebook stream.
pub fn simulate_dp(
    spec: &DpChannelSpec,
    n: usize,
    rate: f64,
    params: &DpCodeParams,
    jammer: &dyn GaussianJammer,
    trials: u64,
    seed: u64,
) -> Result<DpSimulation> {
    let info = plan(spec, n, rate, params)?;
    let code = match info.backend {
        Backend::Explicit => Code::Explicit(SphereCodebook::with_counts(
            n,
            info.bins,
            info.per_bin,
            info.scheme,
            seed,
            params.memory_cap,
        )?),
        _ => Code::Ensemble(EnsembleCode::new(n, info.bins, info.per_bin, info.scheme)),
    };
    let public = PublicCodeParams { n, rate: info.rate, rate_tilde: info.rate_tilde, messages: info.messages };
    let id = jammer.id();
    let records = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(spec, &info, params, &code, jammer, &id, &public, seed, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&info, &id, n, &records);
    Ok(DpSimulation { info, trials: records, summary })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    spec: &DpChannelSpec,
    info: &DpRunInfo,
    params: &DpCodeParams,
    code: &Code,
    jammer: &dyn GaussianJammer,
    id: &str,
    public: &PublicCodeParams,
    seed: u64,
    t: u64,
) -> Result<DpTrial> {
    let n = public.n;
    let mut channel = stream(seed, Domain::Channel, t);
    let mut shared = stream(seed, Domain::Shared, t);
    let mut adversary = AdversaryRng::new(seed, t);

    let m = channel.random_range(1..=info.messages);
    let s = gaussian_vec(n, spec.state_var, &mut channel);
    let z = gaussian_vec(n, spec.noise_var, &mut channel);

    let perm = match (params.permute, code) {
        (true, Code::Explicit(_)) => Some(MessagePermutation::sample(info.messages, &mut shared)?),
        _ => None,
    };
    let bin = match (&perm, params.permute) {
        (Some(p), _) => p.forward(m) - 1,
        (None, true) => shared.random_range(0..info.messages),
        (None, false) => m - 1,
    };
    let enc: DpEncoding = match code {
        Code::Explicit(cb) => cb.encode(bin as usize, &s, info.delta1, &mut shared),
        Code::Ensemble(e) => e.encode(bin, &s, info.delta1, &mut shared),
    };

    let k = jammer.knowledge();
    let seen_state;
    let state_view: &[f64] = if k.state {
        &s
    } else {
        seen_state = vec![0.0; n];
        &seen_state
    };
    let public_view = if k.code_params { *public } else { PublicCodeParams::default() };
    let j = jammer.jam(if k.message { m } else { 0 }, state_view, &public_view, &mut adversary);
    if j.len() != n {
        return Err(Error::DimensionMismatch(format!("jammer `{id}` returned {} symbols, n = {n}", j.len())));
    }
    let energy = check_power(id, &j, spec.lambda)?;

    let y: Vec<f64> = (0..n).map(|i| enc.x[i] + s[i] + j[i] + z[i]).collect();
    let decoded = match code {
        Code::Explicit(cb) => cb.decode(&y, Some(enc.bin as usize)).map(|(b, c)| (b as u64, c)),
        Code::Ensemble(e) => e.decode(&y, &enc.u, enc.bin, &mut shared),
    };
    let mhat = match decoded {
        None => 0,
        Some((d, _)) => match (&perm, params.permute) {
            (Some(p), _) => p.inverse(d + 1),
            (None, true) if d == bin => m,
            (None, true) => other_message(info.messages, m, &mut shared),
            (None, false) => d + 1,
        },
    };

    let ny = norm_sq(&y).sqrt();
    let nu = norm_sq(&enc.u).sqrt();
    let yu_cosine = if ny > 0.0 { dot(&y, &enc.u) / (ny * nu) } else { 0.0 };
    let residual: Vec<f64> = enc.u.iter().zip(&s).map(|(u, s)| u - info.scheme.alpha * s).collect();
    let ns = norm_sq(&s).sqrt();
    let orthogonality = if ns > 0.0 {
        (dot(&j, &enc.u) - dot(&j, &s) * dot(&s, &enc.u) / (ns * ns)).abs() / n as f64
    } else {
        dot(&j, &enc.u).abs() / n as f64
    };
    let error_type = if mhat == m {
        "none"
    } else if decoded.is_none() {
        "no_output"
    } else if enc.fallback {
        "encoder_fallback"
    } else if yu_cosine < info.scheme.theta - params.threshold_slack {
        "correct_dropped"
    } else {
        "impostor"
    };
    Ok(DpTrial {
        trial: t,
        n,
        rate: info.rate,
        rate_tilde: info.rate_tilde,
        jammer_id: id.to_string(),
        encoder_fallback: enc.fallback,
        m,
        mhat,
        error_type,
        yu_cosine,
        power_x: norm_sq(&residual) / n as f64,
        zero_fallback: enc.zeroed,
        jammer_power: energy / n as f64,
        orthogonality,
        impostor_cosine: decoded.map_or(f64::NAN, |(_, c)| c),
    })
}

fn summarize(info: &DpRunInfo, id: &str, n: usize, records: &[DpTrial]) -> DpSummary {
    let trials = records.len() as u64;
    let errors = records.iter().filter(|r| r.is_error()).count() as u64;
    let (ci_lo, ci_hi) = wilson95(errors, trials);
    let yu: Vec<f64> = records.iter().map(|r| r.yu_cosine).collect();
    DpSummary {
        n,
        rate: info.rate,
        jammer_id: id.to_string(),
        trials,
        errors,
        err_rate: if trials > 0 { errors as f64 / trials as f64 } else { 0.0 },
        ci_lo,
        ci_hi,
        theta: info.scheme.theta,
        quantile05_yu: if yu.is_empty() { f64::NAN } else { quantile(&yu, 0.05) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{parse_gaussian, ZeroJammer};
    use crate::capacity::dp_avc_capacity;
    use crate::report::to_csv;

    fn unit() -> DpChannelSpec {
        DpChannelSpec::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn noiseless_identity_never_errs() {
        let spec = DpChannelSpec::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let params = DpCodeParams { rate_tilde: Some(0.0), ..Default::default() };
        let sim = simulate_dp(&spec, 32, 0.2, &params, &ZeroJammer, 200, 1).unwrap();
        assert_eq!(sim.info.backend, Backend::Explicit);
        assert_eq!(sim.summary.errors, 0);
        assert!(sim.trials.iter().all(|t| (t.yu_cosine - 1.0).abs() < 1e-12));
    }

    #[test]
    fn explicit_and_ensemble_agree_at_low_rate() {
        // small codebook: the stored and the simulated ensembles should give
        // comparable error rates
        let spec = DpChannelSpec::new(1.0, 1.0, 1.0, 0.1).unwrap();
        let jam = parse_gaussian("gauss_trunc", 1.0).unwrap();
        let base = DpCodeParams { rate_tilde: Some(6.0 / 64.0), delta1: Some(0.02), ..Default::default() };
        let ex = simulate_dp(&spec, 64, 6.0 / 64.0, &base, jam.as_ref(), 2000, 3).unwrap();
        let en = simulate_dp(
            &spec,
            64,
            6.0 / 64.0,
            &DpCodeParams { backend: Backend::Ensemble, ..base },
            jam.as_ref(),
            2000,
            3,
        )
        .unwrap();
        assert_eq!(ex.info.backend, Backend::Explicit);
        let (a, b) = (ex.summary.err_rate, en.summary.err_rate);
        // the ensemble may only overstate the error
        assert!(b + 0.03 >= a, "explicit {a} ensemble {b}");
        assert!(b <= a + 0.1, "explicit {a} ensemble {b}");
    }

    #[test]
    fn noise_only_anchor() {
        let spec = unit();
        let c = dp_avc_capacity(&spec).unwrap();
        let sim = simulate_dp(&spec, 256, 0.5 * c, &DpCodeParams::default(), &ZeroJammer, 300, 2).unwrap();
        assert_eq!(sim.info.backend, Backend::Ensemble);
        assert!(sim.summary.err_rate < 0.1, "{:?}", sim.summary);
    }

    #[test]
    fn transmitted_power_and_jammer_power_are_feasible() {
        let spec = unit();
        let jam = parse_gaussian("state_cancel", 1.0).unwrap();
        let sim = simulate_dp(&spec, 128, 0.1, &DpCodeParams::default(), jam.as_ref(), 200, 4).unwrap();
        for t in &sim.trials {
            assert!(t.jammer_power <= 1.0 + 1e-9);
            assert!(t.zero_fallback || t.power_x <= 1.0);
        }
    }

    struct Loud;
    impl GaussianJammer for Loud {
        fn id(&self) -> String {
            "loud".into()
        }
        fn knowledge(&self) -> crate::adversary::Knowledge {
            Default::default()
        }
        fn lambda(&self) -> f64 {
            1.0
        }
        fn jam(&self, _: u64, s: &[f64], _: &PublicCodeParams, _: &mut AdversaryRng) -> Vec<f64> {
            vec![2.0; s.len()]
        }
    }

    #[test]
    fn overpowered_jammer_is_rejected() {
        let err = simulate_dp(&unit(), 32, 0.1, &DpCodeParams::default(), &Loud, 5, 0);
        assert!(matches!(err, Err(Error::JammerPowerViolation { .. })));
    }

    #[test]
    fn reruns_are_identical() {
        let jam = parse_gaussian("msg_aware+random_dir", 1.0).unwrap();
        let p = DpCodeParams { permute: true, ..Default::default() };
        let a = simulate_dp(&unit(), 64, 0.1, &p, jam.as_ref(), 100, 9).unwrap();
        let b = simulate_dp(&unit(), 64, 0.1, &p, jam.as_ref(), 100, 9).unwrap();
        assert_eq!(to_csv(&a.trials), to_csv(&b.trials));
        assert_eq!(to_csv(&[a.summary]), to_csv(&[b.summary]));
    }

    #[test]
    fn explicit_backend_refuses_oversized_codebooks() {
        let p = DpCodeParams { backend: Backend::Explicit, ..Default::default() };
        assert!(matches!(plan(&unit(), 512, 0.2, &p), Err(Error::CodebookTooLarge { .. })));
    }
}
