//! Exact probability that an independent typical codeword lands in the list
//! L(y, gamma), against the exponential bound, on the noisy stuck-at design.

use avc_sim::gp_codec::analysis::impostor_check;
use avc_sim::gp_codec::fixtures::noisy_stuck_at;
use avc_sim::gp_codec::simulate::{plan, GpCodeParams};

fn main() -> avc_sim::Result<()> {
    let d = noisy_stuck_at(0.2, [0.0, 0.1]);
    let worst = d.worst_jammer()?;
    println!("min_Q I(U;Y) = {:.5}, I(U;S) = {:.5}", worst.mutual_information, d.state_information());
    for n in [64, 128, 256] {
        let info = plan(&d, n, 0.5 * worst.value, &GpCodeParams::default(), 7)?;
        let c = impostor_check(&d, n, info.delta, info.delta1, info.gamma, 200, 4.0, 1)?;
        println!(
            "n={n:>3} gamma {:.4}  gamma~ {:.4}  mean p_imp {:.3e}  bound {:.3e}  {}",
            c.gamma,
            c.exponent.gamma_tilde,
            c.mean_probability,
            c.bound,
            if c.holds() { "holds" } else { "VIOLATED" }
        );
    }
    Ok(())
}
