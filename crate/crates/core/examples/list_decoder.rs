//! The list decoder's membership test: is a joint type within gamma of the
//! law induced by some jammer kernel?

use avc_sim::gp_codec::fixtures::noisy_stuck_at;
use avc_sim::gp_codec::list::{ListDecoder, ListMode, DEFAULT_LP_TOL};

fn main() -> avc_sim::Result<()> {
    let d = noisy_stuck_at(0.2, [0.0, 0.1]);
    let dec = ListDecoder::new(&d.spec, &d.strategy, &d.p_us, 0.05, DEFAULT_LP_TOL)?;
    // T_{U,Y} indexed u * |Y| + y
    let clean = dec.joint(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    let noisy = dec.joint(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    let independent = vec![0.25; 4];
    for (name, t) in [("quiet jammer", &clean), ("noisy jammer", &noisy), ("independent", &independent)] {
        let (dev, q) = dec.solve(t)?;
        println!(
            "{name:<13} T = {:?}  min deviation {dev:.4}  listed {}  best Q(j=1|s) = {:.2?}",
            t.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            dec.contains(t, ListMode::Full, None)?,
            [q[1], q[3], q[5]]
        );
    }
    Ok(())
}
