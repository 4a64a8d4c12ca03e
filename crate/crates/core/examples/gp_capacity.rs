//! Capacity of two small state-dependent channels: a stuck-at memory cell
//! and a binary additive channel with an unconstrained binary jammer.

use std::time::Instant;

use avc_sim::capacity::{gp_avc_capacity, GpChannelSpec, GpSolverConfig};
use avc_sim::prob::{ConditionalKernel, Distribution};

fn main() -> avc_sim::Result<()> {
    // S = 0: cell stuck at 0, S = 1: stuck at 1, S = 2: Y = X
    let p = 0.2;
    let w = ConditionalKernel::from_fn(2, vec![2, 3, 1], |y, c| {
        let out = match c[1] {
            0 => 0,
            1 => 1,
            _ => c[0],
        };
        f64::from(y == out)
    })?;
    let stuck = GpChannelSpec::new(w, Distribution::new(vec![p / 2.0, p / 2.0, 1.0 - p])?)?;
    let t = Instant::now();
    let r = gp_avc_capacity(&stuck, &GpSolverConfig::default())?;
    println!("stuck-at p={p}: C = {:.6} bits (1 - p = {:.6}) in {:.2?}", r.value, 1.0 - p, t.elapsed());
    println!(
        "  |U| = {}, grid gap {:?}, outer iterations {}",
        r.strategy.u_size(),
        r.diagnostics.grid_gap,
        r.diagnostics.ascent_iterations
    );

    let w = ConditionalKernel::from_fn(2, vec![2, 2, 2], |y, c| f64::from(y == c[0] ^ c[1] ^ c[2]))?;
    let additive = GpChannelSpec::new(w, Distribution::uniform(2))?;
    let t = Instant::now();
    let r = gp_avc_capacity(&additive, &GpSolverConfig::default())?;
    println!("binary additive: C = {:.3e} bits in {:.2?}", r.value, t.elapsed());
    for s in 0..2 {
        println!("  Q*(j=1 | s={s}) = {:.4}", r.q.prob(1, &[s]));
    }
    Ok(())
}
