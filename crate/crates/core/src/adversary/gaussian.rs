use rand::Rng;
use rand_distr::{Distribution as _, Normal};

use super::{AdversaryRng, Knowledge, MessageMap, PublicCodeParams};
use crate::dp_codec::sphere::{norm_sq, sample_sphere};
use crate::error::{Error, Result};

/// Relative slack on `||j||^2 <= n Lambda` that absorbs floating-point
/// rounding in norm rescaling.
pub const POWER_SLACK: f64 = 1e-12;

/// Jammer for the Gaussian channel with power budget `Lambda`.
pub trait GaussianJammer: Send + Sync {
    fn id(&self) -> String;
    fn knowledge(&self) -> Knowledge;
    fn lambda(&self) -> f64;
    fn jam(&self, message: u64, state: &[f64], params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<f64>;
}

/// Reject sequences outside the power ball.
pub fn check_power(id: &str, j: &[f64], lambda: f64) -> Result<f64> {
    let energy = norm_sq(j);
    let budget = j.len() as f64 * lambda;
    if energy > budget * (1.0 + POWER_SLACK) {
        return Err(Error::JammerPowerViolation { id: id.to_string(), energy, budget });
    }
    Ok(energy)
}

/// I.i.d. `N(0, Lambda - delta)` conditioned on the power ball by resampling
/// the whole sequence.
#[derive(Debug, Clone, Copy)]
pub struct GaussianIidTruncated {
    lambda: f64,
    delta: f64,
    normal: Normal<f64>,
}

impl GaussianIidTruncated {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < lambda) {
            return Err(Error::Domain(format!("need 0 < delta < Lambda, got delta={delta}, Lambda={lambda}")));
        }
        Ok(Self { lambda, delta, normal: Normal::new(0.0, (lambda - delta).sqrt()).expect("finite variance") })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// One feasible draw and the number of attempts it took.
    pub fn sample_counted<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<f64>, usize) {
        let budget = n as f64 * self.lambda;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let j: Vec<f64> = (0..n).map(|_| self.normal.sample(rng)).collect();
            if norm_sq(&j) <= budget {
                return (j, attempts);
            }
        }
    }
}

impl GaussianJammer for GaussianIidTruncated {
    fn id(&self) -> String {
        "gauss_trunc".into()
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::NONE
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn jam(&self, _message: u64, state: &[f64], _params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<f64> {
        self.sample_counted(state.len(), rng).0
    }
}

/// `j = -c s` with `c = min(1, sqrt(n Lambda) / ||s||)`: removes the state when
/// the budget allows, otherwise pushes against it at full power.
#[derive(Debug, Clone, Copy)]
pub struct StateCancelling {
    pub lambda: f64,
}

impl GaussianJammer for StateCancelling {
    fn id(&self) -> String {
        "state_cancel".into()
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::STATE
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn jam(&self, _message: u64, state: &[f64], _params: &PublicCodeParams, _rng: &mut AdversaryRng) -> Vec<f64> {
        let s2 = norm_sq(state);
        if s2 == 0.0 {
            return vec![0.0; state.len()];
        }
        let c = (state.len() as f64 * self.lambda / s2).sqrt().min(1.0);
        state.iter().map(|x| -c * x).collect()
    }
}

/// Uniform direction at full power.
#[derive(Debug, Clone, Copy)]
pub struct RandomDirection {
    pub lambda: f64,
}

impl GaussianJammer for RandomDirection {
    fn id(&self) -> String {
        "random_dir".into()
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::NONE
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn jam(&self, _message: u64, state: &[f64], _params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<f64> {
        if self.lambda == 0.0 {
            return vec![0.0; state.len()];
        }
        sample_sphere(state.len(), (state.len() as f64 * self.lambda).sqrt(), rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroJammer;

impl GaussianJammer for ZeroJammer {
    fn id(&self) -> String {
        "zero".into()
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge::NONE
    }

    fn lambda(&self) -> f64 {
        0.0
    }

    fn jam(&self, _message: u64, state: &[f64], _params: &PublicCodeParams, _rng: &mut AdversaryRng) -> Vec<f64> {
        vec![0.0; state.len()]
    }
}

/// Flips the signs of the base output with a message-keyed pattern; the norm,
/// and so feasibility, is unchanged.
pub struct MessageAwareGaussian {
    pub base: Box<dyn GaussianJammer>,
    pub map: MessageMap,
}

impl GaussianJammer for MessageAwareGaussian {
    fn id(&self) -> String {
        format!("msg_aware+{}", self.base.id())
    }

    fn knowledge(&self) -> Knowledge {
        Knowledge { message: true, ..self.base.knowledge() }
    }

    fn lambda(&self) -> f64 {
        self.base.lambda()
    }

    fn jam(&self, message: u64, state: &[f64], params: &PublicCodeParams, rng: &mut AdversaryRng) -> Vec<f64> {
        let mut j = self.base.jam(message, state, params, rng);
        for (i, x) in j.iter_mut().enumerate() {
            if let Some(bits) = self.map.bits(message, i as u64) {
                if bits & 1 == 1 {
                    *x = -*x;
                }
            }
        }
        j
    }
}
