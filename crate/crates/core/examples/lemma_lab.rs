//! Monte Carlo checks of the spherical-cap bounds, the refined Markov lemma
//! and Hoeffding's inequality for sampling without replacement.

use avc_sim::lemmas::hoeffding::{hoeffding_wor_tail, Urn};
use avc_sim::lemmas::markov::{markov_sweep, MarkovInstance};
use avc_sim::lemmas::sphere_cap::{cap_exact, sphere_cap_montecarlo, Direction};

fn main() -> avc_sim::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    println!("sphere caps ({trials} points each)");
    for gamma in [0.2, 0.3, 0.5] {
        for n in [50, 100, 200] {
            let e =
                sphere_cap_montecarlo(gamma, n, trials, Direction::Axis, 1, (gamma * 100.0) as u64 * 1000 + n as u64)?;
            println!(
                "  gamma {gamma:.1} n {n:>3}: rate {:.3e}  exact {:.3e}  bounds [{:.3e}, {:.3e}] {}",
                e.rate,
                cap_exact(gamma, n),
                e.lower,
                e.upper,
                if e.within_bounds() { "ok" } else { "OUT" }
            );
        }
    }

    println!("\nrefined Markov lemma, rare-cell instance");
    let inst = MarkovInstance::binary_rare_cell();
    let sweep = markov_sweep(&inst, &[50, 100, 200], 0.02, &[0.03, 0.05, 0.075, 0.1], trials.min(50_000), 2)?;
    for d in &sweep.decays {
        let rates: Vec<String> = d.points.iter().map(|p| format!("{:.2e}", p.rate)).collect();
        println!("  delta {:.3}: rates {}  K = {:?}", d.delta, rates.join(" "), d.k_hat);
    }
    println!("  smallest decaying delta: {:?}", sweep.chosen().map(|d| d.delta));

    println!("\nHoeffding without replacement, 1000 items, 300 marked, sample 100");
    let urn = Urn::new(1000, 300, 100)?;
    for (i, t) in [0.05, 0.1, 0.15].into_iter().enumerate() {
        let e = hoeffding_wor_tail(urn, t, trials, 3, i as u64)?;
        println!("  t {t:.2}: tail {:.3e} <= bound {:.3e}", e.rate, e.bound);
    }
    Ok(())
}
