//! Strong typicality: set sizes, uniform sampling and conditional types.

use avc_sim::prob::{
    is_typical, ConditionalTypeSampler, Distribution, EmpiricalType, JointDistribution, TypicalSampler,
    TypicalSetParams,
};
use rand::SeedableRng;

fn main() -> avc_sim::Result<()> {
    let p = Distribution::new(vec![0.5, 0.3, 0.2])?;
    println!("H(P) = {:.4} bits", p.entropy());
    for (n, delta) in [(30, 0.05), (60, 0.05), (120, 0.05), (120, 0.02)] {
        let s = TypicalSampler::new(&p, TypicalSetParams::new(n, delta))?;
        println!(
            "n {n:>3} delta {delta}: {:>3} types, (1/n) log2 |T| = {:.4}",
            s.types().len(),
            s.log_size() / std::f64::consts::LN_2 / n as f64
        );
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let params = TypicalSetParams::new(120, 0.05);
    let x = TypicalSampler::new(&p, params)?.sample(&mut rng);
    println!("\nsample type {:?}, typical: {}", EmpiricalType::of(&x, 3).counts(), is_typical(&x, &p, params));

    let joint = JointDistribution::new(3, 2, vec![0.4, 0.1, 0.1, 0.2, 0.05, 0.15])?;
    let z = ConditionalTypeSampler::new(&x, &joint, 0.05)?.sample(&mut rng);
    println!("joint type of (x, z): {:?}", EmpiricalType::joint(&x, 3, &z, 2).counts());
    Ok(())
}
