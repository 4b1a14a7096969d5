//! Alice plans a tape and a packet; Bob runs sessions without talking back
//! until he is done.
//!
//! `cargo run --release --example packet_protocol`

use std::f64::consts::PI;

use czwalk::optimizer::ControlMode;
use czwalk::protocol::{replay_transcript, run_sessions, write_transcript};
use czwalk::{derive_stream, execute_session, plan_session, verify_transcript, CouplingStrength, StrategyKind};

fn main() -> czwalk::Result<()> {
    let alpha = CouplingStrength::new(PI / 16.0)?;
    for kind in [StrategyKind::FlipUndo, StrategyKind::OneStep(ControlMode::ONE_PORT), StrategyKind::Unguided] {
        let tape = plan_session(kind, alpha, 0.999, PI / 100.0)?;
        let stats = run_sessions(&tape, alpha, 100_000, 7)?;
        println!(
            "{:<16} packet {:>4}, {:>3} tape entries, failure rate {:.5}, mean used {:.2}, mid-session messages {}",
            kind.label(),
            tape.packet_size,
            tape.entries.len(),
            stats.failure_rate(),
            stats.hitting.mean(),
            stats.mid_session_messages
        );
    }

    let tape = plan_session(StrategyKind::FlipUndo, alpha, 0.999, 0.0)?;
    let mut t = execute_session(&tape, alpha, &mut derive_stream(7, 0))?;
    t.seed = Some(7);
    println!("\nverified: {}, replayed position {:.6}", verify_transcript(&t, 0.0), replay_transcript(&tape, alpha, &t)?);
    write_transcript(&t, std::io::stdout())?;

    match plan_session(StrategyKind::OneStep(ControlMode::TWO_PORT_TWO_DOF), alpha, 0.999, 0.0) {
        Err(e) => println!("\n2p2d: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
