//! Law of the cosine between a fixed direction and a uniform point on the
//! sphere in `R^n`: `(C + 1) / 2 ~ Beta((n-1)/2, (n-1)/2)`, density
//! proportional to `(1 - c^2)^((n-3)/2)`.

use rand::Rng;
use rand_distr::{Beta, Distribution as _};

use crate::special::{ln_beta_inc, ln_diff_exp};

#[derive(Debug, Clone, Copy)]
pub struct SphereCosine {
    n: usize,
    a: f64,
}

impl SphereCosine {
    /// Requires `n >= 4` so that the density is bounded and log-concave.
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "cosine law sampler needs n >= 4");
        Self { n, a: (n as f64 - 1.0) / 2.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln P(C >= c)`.
    pub fn ln_tail(&self, c: f64) -> f64 {
        if c <= -1.0 {
            return 0.0;
        }
        if c >= 1.0 {
            return f64::NEG_INFINITY;
        }
        ln_beta_inc((1.0 - c) / 2.0, self.a, self.a)
    }

    /// `ln P(lo <= C <= hi)`.
    pub fn ln_window(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return f64::NEG_INFINITY;
        }
        // compute on the side where both tails are small
        if lo + hi >= 0.0 {
            ln_diff_exp(self.ln_tail(lo), self.ln_tail(hi))
        } else {
            ln_diff_exp(self.ln_tail(-hi), self.ln_tail(-lo))
        }
    }

    fn ln_density(&self, c: f64) -> f64 {
        (self.a - 1.0) * (1.0 - c * c).ln()
    }

    /// Draw `C` conditioned on `lo <= C <= hi`.
    pub fn sample_window<R: Rng + ?Sized>(&self, lo: f64, hi: f64, rng: &mut R) -> f64 {
        let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
        assert!(lo <= hi, "empty cosine window");
        if self.ln_window(lo, hi) > 0.1f64.ln() {
            let beta = Beta::new(self.a, self.a).expect("positive shape");
            loop {
                let c = 2.0 * beta.sample(rng) - 1.0;
                if (lo..=hi).contains(&c) {
                    return c;
                }
            }
        }
        // log-concave density: the tangent at the mode of the window is an envelope
        let anchor = 0f64.clamp(lo, hi);
        let slope = -2.0 * (self.a - 1.0) * anchor / (1.0 - anchor * anchor);
        let base = self.ln_density(anchor);
        let width = hi - lo;
        loop {
            let u: f64 = rng.random();
            let c = if (slope * width).abs() < 1e-12 {
                lo + u * width
            } else if slope < 0.0 {
                lo + (-u * (-(slope * width).exp_m1())).ln_1p() / slope
            } else {
                hi + (-u * (-(-slope * width).exp_m1())).ln_1p() / slope
            };
            let c = c.clamp(lo, hi);
            let envelope = base + slope * (c - anchor);
            if rng.random::<f64>().ln() <= self.ln_density(c) - envelope {
                return c;
            }
        }
    }

    /// Largest of `count` independent cosines (`count` may exceed `u64`).
    pub fn sample_max<R: Rng + ?Sized>(&self, count: f64, rng: &mut R) -> f64 {
        if count <= 0.0 {
            return -1.0;
        }
        let v: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        // P(max <= c) = (1 - tail(c))^count = v  =>  tail(c) = -expm1(ln v / count)
        let target = (-(v.ln() / count).exp_m1()).ln();
        self.tail_inverse(target)
    }

    /// The `c` with `ln P(C >= c) = ln_p`.
    pub fn tail_inverse(&self, ln_p: f64) -> f64 {
        if ln_p >= 0.0 {
            return -1.0;
        }
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_tail(mid) > ln_p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
