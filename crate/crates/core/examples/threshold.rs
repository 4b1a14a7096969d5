//! Coupling above which the first failure angle exceeds π/2, and the
//! multi-step horizon bound `⌊1/p₂⌋`.
//!
//! `cargo run --release --example threshold`

use std::f64::consts::{FRAC_PI_4, PI};

use czwalk::analytics::max_steps_bound;
use czwalk::{characterize_step, solve_port1, threshold_alpha, xbasis_config, CouplingStrength, Dof};

fn main() -> czwalk::Result<()> {
    let t = threshold_alpha(1e-12)?;
    println!("α* = {:.8} rad = {:.4}·π/4", t.value(), t.fraction_of_max());
    println!("arctan(√tan(π/8)) = {:.8}", (PI / 8.0).tan().sqrt().atan());

    println!("\n{:>6} {:>9} {:>9} {:>6}", "α/αmax", "p1", "p2", "⌊1/p2⌋");
    for k in 1..=9 {
        let alpha = CouplingStrength::new(k as f64 * FRAC_PI_4 / 10.0)?;
        let first = characterize_step(alpha, &xbasis_config());
        let p2 = solve_port1(alpha, PI - first.phi_port0.abs(), Dof::One)?.success_prob;
        println!("{:>6.1} {:>9.5} {:>9.5} {:>6}", k as f64 / 10.0, first.p_port1, p2, max_steps_bound(p2)?);
    }
    Ok(())
}
