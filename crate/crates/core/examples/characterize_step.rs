//! Port angles, probabilities and Bloch geometry of a single mediated step.
//!
//! `cargo run --example characterize_step`

use std::f64::consts::{FRAC_PI_4, PI};

use czwalk::qcore::step_kraus;
use czwalk::stepmodel::concyclic_about;
use czwalk::{apply_flip, bloch_points, characterize_step, xbasis_closed_form, xbasis_config, CouplingStrength, StepConfig};

fn main() -> czwalk::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "alpha", "phi0", "phi1", "p0", "p1");
    for k in 1..=8 {
        let alpha = CouplingStrength::new(k as f64 * FRAC_PI_4 / 8.0)?;
        let s = characterize_step(alpha, &xbasis_config());
        println!("{:>8.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}", alpha.value(), s.phi_port0, s.phi_port1, s.p_port0, s.p_port1);
    }

    let alpha = CouplingStrength::new(PI / 16.0)?;
    let cf = xbasis_closed_form(alpha);
    println!("\nclosed form at π/16: phi0 = {:.6}, p1 = {:.7}", cf.phi_port0, cf.p_port1);

    let (kp, km) = step_kraus(alpha, &xbasis_config());
    println!("K+ diagonal: {:?}", kp.diag());
    println!("K- diagonal: {:?}", km.diag());

    let flipped = characterize_step(alpha, &apply_flip(&xbasis_config()));
    println!("flipped step: phi0 = {:.6}, phi1 = {:.6}", flipped.phi_port0, flipped.phi_port1);

    // Unitary back-action needs the four final ancilla states on one circle
    // centred on the measurement axis.
    let steered = StepConfig::steered(alpha, 1.1, 0.9);
    let pts = bloch_points(alpha, &steered);
    println!(
        "steered(1.1, 0.9): concyclic = {}, outcome = {:?}",
        concyclic_about(&pts, &steered.measurement_axis(), 1e-9),
        characterize_step(alpha, &steered)
    );
    let mut skewed = xbasis_config();
    skewed.meas_polar = 1.1;
    println!("tilted measurement valid: {}", characterize_step(alpha, &skewed).valid);
    Ok(())
}
