//! Every jammer on one block: its id, what it knows and the power it spends.

use avc_sim::adversary::{parse_discrete, parse_gaussian, AdversaryRng, PublicCodeParams};
use avc_sim::dp_codec::sphere::{dot, norm_sq};
use avc_sim::prob::ConditionalKernel;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn main() -> avc_sim::Result<()> {
    let n = 256;
    let params = PublicCodeParams { n, rate: 0.1, rate_tilde: 0.05, messages: 1 << 20 };
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let s: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    println!("{:<28} {:>8} {:>10} {:>8}", "gaussian jammer", "power", "corr(j,s)", "knows");
    for spec in ["zero", "gauss_trunc:delta=0.1", "state_cancel", "random_dir", "msg_aware+gauss_trunc"] {
        let j = parse_gaussian(spec, 1.0)?;
        let out = j.jam(42, &s, &params, &mut AdversaryRng::new(9, 0));
        let power = norm_sq(&out) / n as f64;
        let corr = if power > 0.0 { dot(&out, &s) / (norm_sq(&out) * norm_sq(&s)).sqrt() } else { 0.0 };
        println!("{:<28} {power:>8.4} {corr:>10.4} {:?}", j.id(), j.knowledge());
    }

    let states: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let worst = ConditionalKernel::new(2, vec![3], vec![0.0, 1.0, 0.0, 1.0, 0.2, 0.8])?;
    println!("\n{:<28} {:>8}", "discrete jammer", "share j=1");
    for spec in ["constant:j=1", "memoryless:q=0.5/0.5", "worst", "msg_aware+memoryless:q=0.9/0.1"] {
        let j = parse_discrete(spec, 2, 3, Some(&worst))?;
        let out = j.jam(7, &states, &params, &mut AdversaryRng::new(9, 0));
        let ones = out.iter().filter(|&&x| x == 1).count() as f64 / n as f64;
        println!("{:<28} {ones:>8.3}", j.id());
    }
    Ok(())
}
