//! One-step steering with one or two ports and one or two degrees of
//! freedom.
//!
//! `cargo run --release --example one_step_modes`

use std::f64::consts::{FRAC_PI_4, PI};

use czwalk::optimizer::max_port0_angle;
use czwalk::strategies::{one_step_chain, remaining_to_target};
use czwalk::{
    best_step, characterize_step, run_trials, solve_port0, solve_port1, xbasis_config, ControlMode, CouplingStrength, Dof, RunSpec,
    StrategyKind, WalkState,
};

fn main() -> czwalk::Result<()> {
    let alpha = CouplingStrength::new(PI / 16.0)?;
    let first = characterize_step(alpha, &xbasis_config());
    let failed = WalkState { position: first.phi_port0, steps: 1, done: false };
    let second = solve_port1(alpha, remaining_to_target(&failed), Dof::One)?;
    println!(
        "after one failure at π/16: port 1 reaches {:+.6} with p = {:.5} (prep polar {:.4})",
        second.success_phase, second.success_prob, second.config.prep_polar
    );
    for (i, (plan, p)) in one_step_chain(alpha, ControlMode::ONE_PORT, 0.5, 6)?.iter().enumerate() {
        println!("  step {}: target {:+.5}, success {:.5}", i + 1, plan.success_phase, p);
    }

    let high = CouplingStrength::new(0.9 * FRAC_PI_4)?;
    println!("\nα = 0.9·π/4, largest port-0 angle {:.4}", max_port0_angle(high));
    if let Some(p0) = solve_port0(high, 2.0, Dof::Two) {
        println!("port 0 can reach 2.0 rad with p = {:.4}", p0.success_prob);
    }
    let plan = best_step(high, 2.0, ControlMode::TWO_PORT_TWO_DOF)?;
    println!("best plan for 2.0 rad uses {:?} with p = {:.4}", plan.success_port, plan.success_prob);

    println!("\nexpected steps at 0.98·π/4 (10⁵ trials)");
    for mode in [ControlMode::ONE_PORT, ControlMode::TWO_PORT_ONE_DOF, ControlMode::TWO_PORT_TWO_DOF] {
        let d = run_trials(&RunSpec::new(StrategyKind::OneStep(mode), 0.98 * FRAC_PI_4, 0.0, 100_000, 5))?;
        println!("  {}: {:.3} ± {:.3}", mode.label(), d.mean(), d.standard_error());
    }
    Ok(())
}
