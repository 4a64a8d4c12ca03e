//! Capacity of the Gaussian channel with a power-limited jammer, and the
//! cosine bound f(v, w) of the dirty-paper scheme over its domain.

use avc_sim::capacity::{dp_avc_capacity, DpChannelSpec};
use avc_sim::dp_codec::scheme::DpScheme;

fn main() -> avc_sim::Result<()> {
    println!("{:>5} {:>7} {:>6}  {:>9} (state variance 0.1 / 10)", "P", "Lambda", "sigma2", "C");
    for (p, l, s) in [(1.0, 1.0, 1.0), (3.0, 1.0, 1.0), (10.0, 2.0, 0.5), (1.0, 0.0, 1.0), (5.0, 5.0, 0.1)] {
        let a = dp_avc_capacity(&DpChannelSpec::new(p, l, s, 0.1)?)?;
        let b = dp_avc_capacity(&DpChannelSpec::new(p, l, s, 10.0)?)?;
        println!("{p:>5} {l:>7} {s:>6}  {a:>9.6} / {b:.6}");
    }

    let scheme = DpScheme::with_default_backoff(DpChannelSpec::new(1.0, 1.0, 1.0, 1.0)?)?;
    println!("\ntheta = {:.6}, alpha = {:.6}", scheme.theta, scheme.alpha);
    let mut min = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=20 {
        for k in 0..=20 {
            let (v, w) = (-1.0 + 0.1 * i as f64, scheme.spec.lambda * k as f64 / 20.0);
            let f = scheme.fvw(v, w)?;
            if f < min.0 {
                min = (f, v, w);
            }
        }
    }
    println!("min f(v, w) on a 21x21 grid = {:.6} at v = {:.1}, w = {:.2}", min.0, min.1, min.2);
    println!("f(0, Lambda) = {:.6}", scheme.fvw(0.0, scheme.spec.lambda)?);
    Ok(())
}
