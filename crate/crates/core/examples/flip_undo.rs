//! Flip-undo loop: exact mean and CDF against simulation, and the packet
//! size needed for 0.999 success.
//!
//! `cargo run --release --example flip_undo`

use std::f64::consts::PI;

use czwalk::analytics::{flip_undo_cdf, flip_undo_mean, flip_undo_quantile};
use czwalk::strategies::{flip_undo_node, Policy};
use czwalk::{advance, xbasis_closed_form, CouplingStrength, Port, RunSpec, StrategyKind, TargetRule, WalkState};

fn main() -> czwalk::Result<()> {
    let alpha = CouplingStrength::new(PI / 16.0)?;
    let p = xbasis_closed_form(alpha).p_port1;

    // Walk the loop by hand: fail, fail again, then undo.
    let policy = Policy::new(StrategyKind::FlipUndo, alpha)?;
    let rule = TargetRule::exact();
    let mut state = WalkState::origin();
    for port in [Port::Zero, Port::One, Port::One, Port::Zero] {
        let plan = policy.next(&state)?;
        let node = flip_undo_node(alpha, state.position)?;
        state = advance(&state, &plan, port, &rule);
        println!("{node:?} --{port:?}--> position {:+.6} done {}", state.position, state.done);
    }

    let dist = czwalk::run_trials(&RunSpec::new(StrategyKind::FlipUndo, alpha.value(), 0.0, 100_000, 3))?;
    println!("\nmean: simulated {:.3} ± {:.3}, closed form {:.3}", dist.mean(), dist.standard_error(), flip_undo_mean(p)?);
    for n in [1, 5, 21, 51, 95] {
        println!("P(T ≤ {n:>3}) simulated {:.4} exact {:.4}", dist.ecdf(n), flip_undo_cdf(p, n)?);
    }
    println!("packet for q = 0.999: {}", flip_undo_quantile(p, 0.999)?);
    Ok(())
}
