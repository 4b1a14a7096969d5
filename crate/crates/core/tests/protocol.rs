use std::f64::consts::{FRAC_PI_4, PI};

use czwalk::analytics::dkw_epsilon;
use czwalk::optimizer::ControlMode;
use czwalk::protocol::{read_transcript, replay_transcript, run_sessions, write_transcript};
use czwalk::{derive_stream, execute_session, plan_session, run_trials, verify_transcript, CouplingStrength, Error, RunSpec, StrategyKind};

fn coupling(a: f64) -> CouplingStrength {
    CouplingStrength::new(a).unwrap()
}

#[test]
fn flip_undo_packet_fails_rarely_without_mid_session_messages() {
    let a = coupling(PI / 16.0);
    let tape = plan_session(StrategyKind::FlipUndo, a, 0.999, 0.0).unwrap();
    assert_eq!(tape.packet_size, 95);
    let n = 20_000;
    let stats = run_sessions(&tape, a, n, 3).unwrap();
    assert_eq!(stats.mid_session_messages, 0);
    let sigma = (0.001f64 * 0.999 / n as f64).sqrt();
    assert!(stats.failure_rate() <= 0.001 + 3.0 * sigma, "{}", stats.failure_rate());
}

#[test]
fn session_statistics_match_trial_statistics() {
    let a = coupling(0.4);
    for kind in [StrategyKind::FlipUndo, StrategyKind::OneStep(ControlMode::ONE_PORT), StrategyKind::Unguided] {
        let tape = plan_session(kind, a, 0.999, PI / 100.0).unwrap();
        let sessions = run_sessions(&tape, a, 20_000, 8).unwrap().hitting;
        let trials = run_trials(&RunSpec::new(kind, a.value(), PI / 100.0, 20_000, 9)).unwrap();
        // Sessions are censored at the packet size; compare below it.
        let band = dkw_epsilon(sessions.trials(), 0.999) + dkw_epsilon(trials.trials(), 0.999);
        let n_sessions = sessions.trials() as f64;
        for n in 1..tape.packet_size {
            let s = sessions.ecdf(n) * n_sessions / 20_000.0;
            assert!((s - trials.ecdf(n)).abs() <= band, "{kind:?} n={n}");
        }
    }
}

#[test]
fn maximal_coupling_sessions_stop_at_one() {
    let a = coupling(FRAC_PI_4);
    let tape = plan_session(StrategyKind::Unguided, a, 0.999, PI / 100.0).unwrap();
    assert_eq!(tape.packet_size, 1);
    for i in 0..200 {
        let t = execute_session(&tape, a, &mut derive_stream(4, i)).unwrap();
        assert_eq!(t.stopped_at, 1);
        assert!(verify_transcript(&t, PI / 100.0));
    }
}

#[test]
fn transcripts_replay_through_the_walk() {
    let a = coupling(PI / 8.0);
    for kind in [StrategyKind::FlipUndo, StrategyKind::OneStep(ControlMode::ONE_PORT), StrategyKind::OneStep(ControlMode::TWO_PORT_ONE_DOF)]
    {
        let tape = plan_session(kind, a, 0.99, 0.0).unwrap();
        for i in 0..50 {
            let mut t = execute_session(&tape, a, &mut derive_stream(12, i)).unwrap();
            t.seed = Some(12);
            assert_eq!(replay_transcript(&tape, a, &t).unwrap(), t.final_position);
            assert_eq!(t.stopped_at + t.discarded, tape.packet_size);
            assert_eq!(verify_transcript(&t, 0.0), t.succeeded);
            let mut buf = Vec::new();
            write_transcript(&t, &mut buf).unwrap();
            assert_eq!(read_transcript(buf.as_slice()).unwrap(), t);
        }
    }
}

#[test]
fn unguided_success_lands_in_region() {
    let a = coupling(PI / 16.0);
    let tape = plan_session(StrategyKind::Unguided, a, 0.99, PI / 100.0).unwrap();
    let mut seen = 0;
    for i in 0..200 {
        let t = execute_session(&tape, a, &mut derive_stream(13, i)).unwrap();
        if t.succeeded {
            seen += 1;
            assert!(verify_transcript(&t, PI / 100.0));
        }
    }
    assert!(seen > 150);
}

#[test]
fn two_dof_two_port_is_not_tape_expressible() {
    let r = plan_session(StrategyKind::OneStep(ControlMode::TWO_PORT_TWO_DOF), coupling(0.7), 0.999, 0.0);
    assert!(matches!(r, Err(Error::Unsupported(_))));
}
