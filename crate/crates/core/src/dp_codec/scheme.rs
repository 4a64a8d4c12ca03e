//! Constants of the dirty-paper scheme and the decoding threshold.

use crate::capacity::DpChannelSpec;
use crate::error::{Error, Result};

/// Default power backoff as a fraction of `P`.
pub const DEFAULT_BACKOFF_FRACTION: f64 = 0.05;
/// Default encoder slack as a fraction of `alpha * sigma_S^2`.
pub const DEFAULT_DELTA1_FRACTION: f64 = 0.05;
/// Default rate slack `epsilon` in `R~ = 0.5 log2(P_U / P') + epsilon / 2`.
pub const DEFAULT_RATE_SLACK: f64 = 0.1;
/// Floor on the default encoder slack, used when `sigma_S^2 = 0`.
const MIN_DELTA1: f64 = 1e-9;

/// Derived constants for one channel and backoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpScheme {
    pub spec: DpChannelSpec,
    pub eps1: f64,
    /// `P' = P - eps1`.
    pub p_prime: f64,
    /// `alpha = P' / (P' + Lambda + sigma^2)`.
    pub alpha: f64,
    /// `P_U = P' + alpha^2 sigma_S^2`.
    pub p_u: f64,
    pub theta: f64,
}

impl DpScheme {
    pub fn new(spec: DpChannelSpec, eps1: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps1 < spec.power) {
            return Err(Error::InvalidBackoff { eps1, power: spec.power });
        }
        let interference = spec.lambda + spec.noise_var;
        if interference <= 0.0 {
            return Err(Error::DegenerateChannel("Lambda + sigma^2 must be positive".into()));
        }
        let p_prime = spec.power - eps1;
        let alpha = p_prime / (p_prime + interference);
        let p_u = p_prime + alpha * alpha * spec.state_var;
        let theta = (alpha * (p_prime + alpha * spec.state_var) / p_u).sqrt();
        Ok(Self { spec, eps1, p_prime, alpha, p_u, theta })
    }

    /// Scheme with the default backoff `0.05 P`.
    pub fn with_default_backoff(spec: DpChannelSpec) -> Result<Self> {
        Self::new(spec, DEFAULT_BACKOFF_FRACTION * spec.power)
    }

    /// `(Lambda + sigma^2) P' / ((P' + Lambda + sigma^2) P_U)`, equal to `1 - theta^2`.
    pub fn one_minus_theta_sq(&self) -> f64 {
        let i = self.spec.lambda + self.spec.noise_var;
        i * self.p_prime / ((self.p_prime + i) * self.p_u)
    }

    /// `0.5 log2(P_U / P') + eps / 2`.
    pub fn rate_tilde(&self, eps: f64) -> f64 {
        0.5 * (self.p_u / self.p_prime).log2() + eps / 2.0
    }

    pub fn default_delta1(&self) -> f64 {
        (DEFAULT_DELTA1_FRACTION * self.spec.state_var * self.alpha).max(MIN_DELTA1)
    }

    /// Lower bound on the output/codeword cosine as a function of the
    /// normalized jammer-state correlation `v` and jammer power `w`.
    pub fn fvw(&self, v: f64, w: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&v) || !(0.0..=self.spec.lambda).contains(&w) {
            return Err(Error::Domain(format!("f(v, w) needs -1 <= v <= 1 and 0 <= w <= Lambda, got ({v}, {w})")));
        }
        let (a, pp, ss) = (self.alpha, self.p_prime, self.spec.state_var);
        let cross = v * a * (w * ss).sqrt();
        let num = a.sqrt() * (pp + a * ss + cross);
        let den = self.p_u * (pp + a * ss + a * (w - self.spec.lambda) + 2.0 * cross);
        Ok(num / den.sqrt())
    }
}

/// Decoding threshold `sqrt(alpha (P' + alpha sigma_S^2) / P_U)`.
pub fn theta(spec: &DpChannelSpec, eps1: f64) -> Result<f64> {
    Ok(DpScheme::new(*spec, eps1)?.theta)
}
