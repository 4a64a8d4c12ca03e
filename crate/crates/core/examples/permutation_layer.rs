//! Per-message error rates of a stored dirty-paper codebook under a
//! message-aware jammer, with and without the shared message permutation.

use avc_sim::adversary::parse_gaussian;
use avc_sim::capacity::DpChannelSpec;
use avc_sim::dp_codec::simulate::{simulate_dp, Backend, DpCodeParams};
use avc_sim::stats::chi_square_homogeneity;

fn main() -> avc_sim::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let noise = args.first().copied().unwrap_or(10.0);
    let delta1 = args.get(1).copied().unwrap_or(0.005);
    let spec = DpChannelSpec::new(1.0, 1.0, noise, 0.1)?;
    let n = 256;
    let jammer = parse_gaussian("msg_aware+gauss_trunc", spec.lambda)?;
    for permute in [false, true] {
        let params = DpCodeParams {
            rate_tilde: Some(8.0 / n as f64),
            delta1: Some(delta1),
            backend: Backend::Explicit,
            permute,
            ..Default::default()
        };
        let sim = simulate_dp(&spec, n, 4.0 / n as f64, &params, jammer.as_ref(), 16 * 300, 11)?;
        let mut table = vec![vec![0u64; 2]; 16];
        for t in &sim.trials {
            table[(t.m - 1) as usize][t.is_error() as usize] += 1;
        }
        let (stat, p) = chi_square_homogeneity(&table);
        let fallbacks = sim.trials.iter().filter(|t| t.encoder_fallback).count();
        println!(
            "permute={permute}: error rate {:.4}, fallbacks {fallbacks}, chi2 = {stat:.2}, p = {p:.4}",
            sim.summary.err_rate
        );
        let rates: Vec<String> = table.iter().map(|r| format!("{:.2}", r[1] as f64 / (r[0] + r[1]) as f64)).collect();
        println!("  per message: {}", rates.join(" "));
        println!("  min trials per message: {}", table.iter().map(|r| r[0] + r[1]).min().unwrap());
    }
    Ok(())
}
