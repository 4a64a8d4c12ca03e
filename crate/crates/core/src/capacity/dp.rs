use crate::error::{Error, Result};

/// Gaussian channel `Y = X + S + J + Z` with `||X||^2 <= nP`,
/// `||J||^2 <= n Lambda`, `Z ~ N(0, sigma^2)` and `S ~ N(0, sigma_S^2)` known
/// to the encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpChannelSpec {
    pub power: f64,
    pub lambda: f64,
    pub noise_var: f64,
    pub state_var: f64,
}

impl DpChannelSpec {
    pub fn new(power: f64, lambda: f64, noise_var: f64, state_var: f64) -> Result<Self> {
        for (name, v) in [("P", power), ("Lambda", lambda), ("sigma^2", noise_var), ("sigma_S^2", state_var)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(Self { power, lambda, noise_var, state_var })
    }
}

/// `0.5 log2(1 + P / (Lambda + sigma^2))`. The state variance plays no role.
pub fn dp_avc_capacity(spec: &DpChannelSpec) -> Result<f64> {
    let interference = spec.lambda + spec.noise_var;
    if interference <= 0.0 {
        return Err(Error::DegenerateChannel("Lambda + sigma^2 must be positive".into()));
    }
    Ok(0.5 * (spec.power / interference).ln_1p() / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let c = |p, l, s| dp_avc_capacity(&DpChannelSpec::new(p, l, s, 1.0).unwrap()).unwrap();
        assert_eq!(c(0.0, 1.0, 1.0), 0.0);
        assert!((c(1.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((c(3.0, 1.0, 1.0) - 0.5 * 2.5f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(matches!(
            dp_avc_capacity(&DpChannelSpec::new(1.0, 0.0, 0.0, 1.0).unwrap()),
            Err(Error::DegenerateChannel(_))
        ));
        assert!(DpChannelSpec::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }
}
