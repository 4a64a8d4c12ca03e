//! Binned list-decoding code on the noisy stuck-at channel, at half the
//! capacity of the design returned by the solver.

use std::time::Instant;

use avc_sim::adversary::parse_discrete;
use avc_sim::capacity::{gp_avc_capacity, presets, GpSolverConfig};
use avc_sim::gp_codec::simulate::{simulate_gp, GpCodeParams};
use avc_sim::gp_codec::GpDesign;

fn main() -> avc_sim::Result<()> {
    let spec = presets::noisy_stuck_at(0.2, [0.0, 0.1])?;
    let cap = gp_avc_capacity(&spec, &GpSolverConfig { u_size: Some(2), ..GpSolverConfig::default() })?;
    let design = GpDesign::from_capacity(spec.clone(), &cap)?;
    let worst = design.worst_jammer()?.q;
    let rate = 0.5 * cap.value;
    println!("capacity {:.5}, rate {:.5}", cap.value, rate);
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    for n in [64, 128, 256] {
        for name in ["worst", "constant:j=0", "msg_aware+worst"] {
            let jammer = parse_discrete(name, spec.j_size(), spec.s_size(), Some(&worst))?;
            let t = Instant::now();
            let sim = simulate_gp(&design, n, rate, &GpCodeParams::default(), jammer.as_ref(), trials, 3)?;
            let listed = sim.trials.iter().filter(|t| t.in_list).count();
            println!(
                "n={n:>3} {:<16} err {:.3} [{:.3}, {:.3}]  gamma {:.4}  listed {listed}/{trials}  {:?}",
                sim.summary.jammer_id,
                sim.summary.err_rate,
                sim.summary.ci_lo,
                sim.summary.ci_hi,
                sim.info.gamma,
                t.elapsed()
            );
        }
    }
    Ok(())
}
