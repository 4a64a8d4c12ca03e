//! Dirty-paper code at half the Costa capacity against each Gaussian jammer,
//! for a few block lengths.

use std::time::Instant;

use avc_sim::adversary::parse_gaussian;
use avc_sim::capacity::{dp_avc_capacity, DpChannelSpec};
use avc_sim::dp_codec::simulate::{simulate_dp, DpCodeParams};

fn main() -> avc_sim::Result<()> {
    let spec = DpChannelSpec::new(1.0, 1.0, 1.0, 1.0)?;
    let rate = 0.5 * dp_avc_capacity(&spec)?;
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let jammers = ["gauss_trunc", "state_cancel", "random_dir", "msg_aware+state_cancel"];
    println!("{:>4} {:<24} {:>8} {:>18} {:>7} {:>7} {:>8}", "n", "jammer", "err", "95% CI", "theta", "q05", "fallback");
    for n in [128, 256, 512] {
        for spec_str in jammers {
            let jammer = parse_gaussian(spec_str, spec.lambda)?;
            let t = Instant::now();
            let sim = simulate_dp(&spec, n, rate, &DpCodeParams::default(), jammer.as_ref(), trials, 7)?;
            let s = &sim.summary;
            let fallbacks = sim.trials.iter().filter(|t| t.encoder_fallback).count();
            println!(
                "{n:>4} {:<24} {:>8.4} [{:.4}, {:.4}] {:>7.4} {:>7.4} {:>8}  ({:.1?})",
                s.jammer_id,
                s.err_rate,
                s.ci_lo,
                s.ci_hi,
                s.theta,
                s.quantile05_yu,
                fallbacks,
                t.elapsed()
            );
        }
    }
    Ok(())
}
