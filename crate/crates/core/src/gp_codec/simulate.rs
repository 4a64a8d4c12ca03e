//! Monte Carlo harness for the discrete code.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use rayon::prelude::*;

use super::codebook::{common_bin, count_for_rate, DiscreteBinnedCodebook, MEMORY_CAP};
use super::ensemble::GpEnsemble;
use super::list::{conditional_type, joint_type, ListDecoder, ListMode, DEFAULT_LP_TOL};
use super::GpDesign;
use crate::adversary::{AdversaryRng, DiscreteJammer, PublicCodeParams};
use crate::capacity::GpChannelSpec;
use crate::csv_fields;
use crate::dp_codec::simulate::Backend;
use crate::error::{Error, Result};
use crate::permutation::MessagePermutation;
use crate::prob::{nominal_counts, ConditionalKernel};
use crate::report::{quote, CsvRecord};
use crate::rng::{stream, Domain};
use crate::stats::{quantile, wilson95};

/// Largest message label used by the ensemble backend.
pub const MAX_LABEL: f64 = 9_223_372_036_854_775_808.0;

/// Code construction knobs. `None` fields follow the default schedule
/// `delta = n^{-1/3}`, `delta1 = 2 delta`, calibrated `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpCodeParams {
    pub delta: Option<f64>,
    pub delta1: Option<f64>,
    pub gamma: Option<f64>,
    pub calibration_trials: u64,
    pub calibration_quantile: f64,
    /// Jammer kernel used while calibrating `gamma`; uniform when `None`.
    pub calibration_kernel: Option<ConditionalKernel>,
    pub lp_tol: f64,
    pub mode: ListMode,
    /// Defaults to the smallest rate for which the encoder falls back with
    /// probability at most `encoder_failure` on the most likely state type.
    pub rate_tilde: Option<f64>,
    pub encoder_failure: f64,
    pub backend: Backend,
    pub permute: bool,
    pub memory_cap: u64,
}

impl Default for GpCodeParams {
    fn default() -> Self {
        Self {
            delta: None,
            delta1: None,
            gamma: None,
            calibration_trials: 500,
            calibration_quantile: 0.99,
            calibration_kernel: None,
            lp_tol: DEFAULT_LP_TOL,
            mode: ListMode::Full,
            rate_tilde: None,
            encoder_failure: 0.01,
            backend: Backend::Auto,
            permute: false,
            memory_cap: MEMORY_CAP,
        }
    }
}

/// The code actually used, after defaults, calibration and rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpRunInfo {
    pub delta: f64,
    pub delta1: f64,
    pub gamma: f64,
    pub rate: f64,
    pub rate_tilde: f64,
    pub bins: f64,
    pub per_bin: f64,
    pub messages: u64,
    pub backend: Backend,
    /// `min_Q I(U;Y) - I(U;S)` of the design.
    pub design_rate: f64,
    pub state_information: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpTrial {
    pub trial: u64,
    pub n: usize,
    pub rate: f64,
    pub rate_tilde: f64,
    pub jammer_id: String,
    pub encoder_fallback: bool,
    pub m: u64,
    pub mhat: u64,
    pub error_type: &'static str,
    /// The transmitted codeword is in `L(y, gamma)`.
    pub in_list: bool,
    /// Some codeword outside the transmitted bin is in `L(y, gamma)`.
    pub impostor: bool,
    /// `min_Q ||T_{u,y} - P^{(Q)}||_inf` for the transmitted codeword.
    pub deviation: f64,
}

impl GpTrial {
    pub fn is_error(&self) -> bool {
        self.mhat != self.m
    }
}

impl CsvRecord for GpTrial {
    fn header() -> &'static str {
        "trial,n,R,Rtilde,jammer_id,encoder_fallback,decoded,m,mhat,error_type"
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
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSummary {
    pub n: usize,
    pub rate: f64,
    pub jammer_id: String,
    pub trials: u64,
    pub errors: u64,
    pub err_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CsvRecord for GpSummary {
    fn header() -> &'static str {
        "n,R,jammer_id,trials,errors,err_rate,ci_lo,ci_hi"
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
        );
    }
}

#[derive(Debug, Clone)]
pub struct GpSimulation {
    pub info: GpRunInfo,
    pub trials: Vec<GpTrial>,
    pub summary: GpSummary,
}

/// `n` i.i.d. draws from `p`.
pub fn sample_iid<R: Rng + ?Sized>(p: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let w = WeightedIndex::new(p.iter().copied()).expect("valid distribution");
    (0..n).map(|_| w.sample(rng)).collect()
}

/// `y_i ~ W(. | x_i, s_i, j_i)` independently.
pub fn channel_output<R: Rng + ?Sized>(
    spec: &GpChannelSpec,
    x: &[usize],
    s: &[usize],
    j: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let ny = spec.y_size();
    (0..x.len())
        .map(|i| {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            for y in 0..ny {
                acc += spec.w(y, x[i], s[i], j[i]);
                if r < acc {
                    return y;
                }
            }
            // rounding in the last cell
            (0..ny).rev().find(|&y| spec.w(y, x[i], s[i], j[i]) > 0.0).unwrap_or(ny - 1)
        })
        .collect()
}

/// The `quantile` of the transmitted codeword's LP deviation when the
/// encoder always finds a codeword and the jammer draws `J_i ~ kernel(. | S_i)`.
/// Trial `t` uses calibration stream `t`.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_gamma(
    design: &GpDesign,
    n: usize,
    delta: f64,
    delta1: f64,
    kernel: &ConditionalKernel,
    trials: u64,
    quantile_level: f64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Config("gamma calibration needs at least one trial".into()));
    }
    let spec = &design.spec;
    if kernel.outputs() != spec.j_size() || kernel.conditions() != [spec.s_size()] {
        return Err(Error::DimensionMismatch("calibration kernel must be J | S".into()));
    }
    let ensemble = GpEnsemble::new(design, n, 1.0, 1.0, delta, delta1)?;
    let decoder = ListDecoder::new(spec, &design.strategy, &design.p_us, 1.0, DEFAULT_LP_TOL)?;
    let rows: Vec<WeightedIndex<f64>> = (0..spec.s_size())
        .map(|s| WeightedIndex::new(kernel.slice(s).iter().copied()).expect("valid kernel"))
        .collect();
    let devs = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>> {
            let mut rng = stream(seed, Domain::Calibration, t);
            let s = sample_iid(spec.p_s.mass(), n, &mut rng);
            let Some(u) = ensemble.qualifying_codeword(&s, &mut rng)? else {
                return Ok(None);
            };
            let x = design.strategy.map(&u, &s);
            let j: Vec<usize> = s.iter().map(|&si| rows[si].sample(&mut rng)).collect();
            let y = channel_output(spec, &x, &s, &j, &mut rng);
            Ok(Some(decoder.deviation(&joint_type(&u, &y, decoder.u_size(), decoder.y_size()))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let devs: Vec<f64> = devs.into_iter().flatten().collect();
    if devs.is_empty() {
        return Err(Error::EmptyTypicalSet { n, delta: delta1 });
    }
    // gamma must be positive even when every deviation is zero
    Ok(quantile(&devs, quantile_level).max(1.0 / n as f64))
}

/// `log2(ceil(ln(1/target) / q)) / n` where `q` is the chance that a uniform
/// typical codeword is jointly typical with a state of nominal type. `None`
/// when no codeword qualifies for that state type.
pub fn default_rate_tilde(design: &GpDesign, n: usize, delta: f64, delta1: f64, target: f64) -> Result<Option<f64>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!("encoder failure target must lie in (0, 1), got {target}")));
    }
    let ensemble = GpEnsemble::new(design, n, 1.0, 1.0, delta, delta1)?;
    let s_counts = nominal_counts(design.spec.p_s.mass(), n);
    let s: Vec<usize> = s_counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect();
    // ln P(fallback) for a single codeword is ln(1 - q)
    let ln_miss = ensemble.ln_fallback_probability(&s)?;
    if ln_miss == 0.0 {
        return Ok(None);
    }
    let per_bin = if ln_miss == f64::NEG_INFINITY { 1.0 } else { (target.ln() / ln_miss).ceil().max(1.0) };
    Ok(Some(per_bin.log2() / n as f64))
}

/// Resolve the schedule, calibrate `gamma` and pick the backend.
pub fn plan(design: &GpDesign, n: usize, rate: f64, params: &GpCodeParams, seed: u64) -> Result<GpRunInfo> {
    if n == 0 {
        return Err(Error::Config("block length must be positive".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::Config(format!("rate must be nonnegative, got {rate}")));
    }
    let delta = params.delta.unwrap_or_else(|| (n as f64).powf(-1.0 / 3.0));
    let delta1 = params.delta1.unwrap_or(2.0 * delta);
    if !(delta > 0.0 && delta1 > 0.0) {
        return Err(Error::Config(format!("delta and delta1 must be positive, got {delta}, {delta1}")));
    }
    let worst = design.worst_jammer()?;
    let state_information = design.state_information();
    let design_rate = worst.value;
    let rate_tilde = match params.rate_tilde {
        Some(r) => r,
        None => default_rate_tilde(design, n, delta, delta1, params.encoder_failure)?
            .unwrap_or(state_information + (design_rate - rate).max(0.0) / 2.0),
    };
    let gamma = match params.gamma {
        Some(g) if g > 0.0 => g,
        Some(g) => return Err(Error::Config(format!("gamma must be positive, got {g}"))),
        None => {
            let uniform = ConditionalKernel::uniform(design.spec.j_size(), vec![design.spec.s_size()]);
            let kernel = params.calibration_kernel.as_ref().unwrap_or(&uniform);
            calibrate_gamma(
                design,
                n,
                delta,
                delta1,
                kernel,
                params.calibration_trials,
                params.calibration_quantile,
                seed,
            )?
        }
    };
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
    Ok(GpRunInfo {
        delta,
        delta1,
        gamma,
        rate: bins.log2() / n as f64,
        rate_tilde: per_bin.log2() / n as f64,
        bins,
        per_bin,
        messages: bins.min(MAX_LABEL) as u64,
        backend,
        design_rate,
        state_information,
    })
}

#[allow(clippy::large_enum_variant)]
enum Code {
    Explicit(DiscreteBinnedCodebook),
    Ensemble(GpEnsemble),
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

/// Run `trials` independent blocks with the stream layout of the dirty-paper
/// harness: message, state and channel noise from the channel stream, encoder
/// choices, permutation and ensemble draws from the shared stream, jammer
/// randomness from the adversary stream.
pub fn simulate_gp(
    design: &GpDesign,
    n: usize,
    rate: f64,
    params: &GpCodeParams,
    jammer: &dyn DiscreteJammer,
    trials: u64,
    seed: u64,
) -> Result<GpSimulation> {
    if jammer.alphabet() != design.spec.j_size() {
        return Err(Error::Config(format!(
            "jammer `{}` uses {} letters, the channel has |J| = {}",
            jammer.id(),
            jammer.alphabet(),
            design.spec.j_size()
        )));
    }
    let info = plan(design, n, rate, params, seed)?;
    let code = match info.backend {
        Backend::Explicit => Code::Explicit(DiscreteBinnedCodebook::with_counts(
            design,
            n,
            info.bins,
            info.per_bin,
            info.delta,
            seed,
            params.memory_cap,
        )?),
        _ => Code::Ensemble(GpEnsemble::new(design, n, info.bins, info.per_bin, info.delta, info.delta1)?),
    };
    let decoder = ListDecoder::new(&design.spec, &design.strategy, &design.p_us, info.gamma, params.lp_tol)?;
    let public = PublicCodeParams { n, rate: info.rate, rate_tilde: info.rate_tilde, messages: info.messages };
    let id = jammer.id();
    let ctx = Context { design, info: &info, params, code: &code, decoder: &decoder, jammer, id: &id, public, seed };
    let records = (0..trials).into_par_iter().map(|t| ctx.trial(t)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&info, &id, n, &records);
    Ok(GpSimulation { info, trials: records, summary })
}

struct Context<'a> {
    design: &'a GpDesign,
    info: &'a GpRunInfo,
    params: &'a GpCodeParams,
    code: &'a Code,
    decoder: &'a ListDecoder,
    jammer: &'a dyn DiscreteJammer,
    id: &'a str,
    public: PublicCodeParams,
    seed: u64,
}

impl Context<'_> {
    fn trial(&self, t: u64) -> Result<GpTrial> {
        let (info, spec) = (self.info, &self.design.spec);
        let n = self.public.n;
        let mut channel = stream(self.seed, Domain::Channel, t);
        let mut shared = stream(self.seed, Domain::Shared, t);
        let mut adversary = AdversaryRng::new(self.seed, t);

        let m = channel.random_range(1..=info.messages);
        let s = sample_iid(spec.p_s.mass(), n, &mut channel);

        let perm = match (self.params.permute, self.code) {
            (true, Code::Explicit(_)) => Some(MessagePermutation::sample(info.messages, &mut shared)?),
            _ => None,
        };
        let bin = match (&perm, self.params.permute) {
            (Some(p), _) => p.forward(m) - 1,
            (None, true) => shared.random_range(0..info.messages),
            (None, false) => m - 1,
        };
        let enc = match self.code {
            Code::Explicit(cb) => cb.encode(self.design, bin as usize, &s, info.delta1, &mut shared),
            Code::Ensemble(e) => e.encode(bin, &s, &mut shared)?,
        };

        let k = self.jammer.knowledge();
        let hidden;
        let state_view: &[usize] = if k.state {
            &s
        } else {
            hidden = vec![0; n];
            &hidden
        };
        let public_view = if k.code_params { self.public } else { PublicCodeParams::default() };
        let j = self.jammer.jam(if k.message { m } else { 0 }, state_view, &public_view, &mut adversary);
        if j.len() != n || j.iter().any(|&a| a >= spec.j_size()) {
            return Err(Error::DimensionMismatch(format!(
                "jammer `{}` returned an invalid sequence (length {}, n = {n})",
                self.id,
                j.len()
            )));
        }
        let y = channel_output(spec, &enc.x, &s, &j, &mut channel);

        let (nu, ny) = (self.decoder.u_size(), self.decoder.y_size());
        let genie_q = conditional_type(&j, &s, spec.j_size(), spec.s_size());
        let genie = (self.params.mode == ListMode::Genie).then_some(genie_q.as_slice());
        let t_uy = joint_type(&enc.u, &y, nu, ny);
        let deviation = match genie {
            Some(q) => self.decoder.deviation_at(&t_uy, q),
            None => self.decoder.deviation(&t_uy)?,
        };
        let in_list = self.decoder.contains(&t_uy, self.params.mode, genie)?;
        let (decoded, impostor) = match self.code {
            Code::Explicit(cb) => {
                let list = cb.list(&y, self.decoder, self.params.mode, genie)?;
                let impostor = list.iter().any(|&(b, _)| b as u64 != enc.bin);
                let decoded = common_bin(&list).map(|b| b as u64);
                // every member shares the reported bin
                debug_assert!(decoded.is_none_or(|d| list.iter().all(|&(b, _)| b as u64 == d)));
                (decoded, impostor)
            }
            Code::Ensemble(e) => {
                let impostor = e.impostor_hit(&y, self.decoder, self.params.mode, genie, &mut shared)?;
                let decoded = match (in_list, impostor) {
                    (true, false) => Some(enc.bin),
                    (false, true) if info.messages > 1 => {
                        Some(other_message(info.messages, enc.bin + 1, &mut shared) - 1)
                    }
                    _ => None,
                };
                (decoded, impostor)
            }
        };
        let mhat = match decoded {
            None => 0,
            Some(d) => match (&perm, self.params.permute) {
                (Some(p), _) => p.inverse(d + 1),
                (None, true) if d == bin => m,
                (None, true) => other_message(info.messages, m, &mut shared),
                (None, false) => d + 1,
            },
        };
        let error_type = if mhat == m {
            "none"
        } else if enc.fallback {
            "encoder_fallback"
        } else if !in_list {
            "correct_dropped"
        } else {
            "impostor"
        };
        Ok(GpTrial {
            trial: t,
            n,
            rate: info.rate,
            rate_tilde: info.rate_tilde,
            jammer_id: self.id.to_string(),
            encoder_fallback: enc.fallback,
            m,
            mhat,
            error_type,
            in_list,
            impostor,
            deviation,
        })
    }
}

fn summarize(info: &GpRunInfo, id: &str, n: usize, records: &[GpTrial]) -> GpSummary {
    let trials = records.len() as u64;
    let errors = records.iter().filter(|r| r.is_error()).count() as u64;
    let (ci_lo, ci_hi) = wilson95(errors, trials);
    GpSummary {
        n,
        rate: info.rate,
        jammer_id: id.to_string(),
        trials,
        errors,
        err_rate: if trials > 0 { errors as f64 / trials as f64 } else { 0.0 },
        ci_lo,
        ci_hi,
    }
}
