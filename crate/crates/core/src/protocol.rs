//! Alice/Bob packet sessions.
//!
//! Alice compiles a strategy into an [`InstructionTape`] and sends it once
//! together with a packet of ancillae. Bob walks the tape, measures each
//! ancilla, follows the branch table on the observed port and stops at the
//! first stop condition. He reports back once; no per-ancilla round trips.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{flip_undo_quantile, unguided_exact, ExactDistribution, HittingDistribution};
use crate::error::{Error, Result};
use crate::montecarlo::{derive_stream, sample_port};
use crate::optimizer::{Dof, Ports, StepPlan};
use crate::qcore::CouplingStrength;
use crate::stepmodel::{apply_flip, xbasis_config, Port};
use crate::strategies::{advance, one_step_chain, wrap_angle, StrategyKind, TargetRule, WalkState};

/// Longest tape or packet the planner will emit.
pub const MAX_PACKET: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapeEntry {
    pub plan: StepPlan,
    /// Bob stops as soon as this port fires.
    pub stop_on_port: Option<Port>,
    /// Next entry indexed by the observed port; `None` means the following
    /// entry, or this one again at the end of the tape.
    pub branch: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstructionTape {
    pub strategy: StrategyKind,
    pub alpha: f64,
    /// Bob also stops when his tracked position enters this region.
    pub target: TargetRule,
    pub entries: Vec<TapeEntry>,
    pub packet_size: u64,
    pub quantile: f64,
}

impl InstructionTape {
    pub fn validate(&self) -> Result<()> {
        if self.packet_size == 0 {
            return Err(Error::InvalidPlan("packet size must be at least 1".into()));
        }
        if self.entries.is_empty() {
            return Err(Error::InvalidPlan("tape has no entries".into()));
        }
        let n = self.entries.len();
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(b) = e.branch {
                if b.iter().any(|&t| t >= n) {
                    return Err(Error::InvalidPlan(format!("entry {i} branches outside the tape")));
                }
            }
        }
        Ok(())
    }

    fn next_entry(&self, at: usize, port: Port) -> usize {
        match self.entries[at].branch {
            Some(b) => b[port.index()],
            None => (at + 1).min(self.entries.len() - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub strategy: String,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub packet_size: u64,
    /// Observed port per consumed ancilla.
    pub outcomes: Vec<u8>,
    /// Ancillae consumed.
    pub stopped_at: u64,
    pub final_position: f64,
    pub succeeded: bool,
    /// Ancillae left unused and discarded.
    pub discarded: u64,
    pub messages_alice_to_bob: u64,
    pub messages_bob_to_alice: u64,
}

fn chain_tape(kind: StrategyKind, alpha: CouplingStrength, q: f64, explicit_branches: bool) -> Result<InstructionTape> {
    let StrategyKind::OneStep(mode) = kind else {
        return Err(Error::Unsupported(format!("{} is not a one-step strategy", kind.label())));
    };
    let chain = one_step_chain(alpha, mode, q, MAX_PACKET as usize)?;
    let success: Vec<f64> = chain.iter().map(|c| c.1).collect();
    if ExactDistribution::from_success_chain(&success).covered_mass() < q {
        return Err(Error::Unsupported(format!("{} needs more than {MAX_PACKET} ancillae at q = {q}", kind.label())));
    }
    let n = chain.len();
    let entries = chain
        .iter()
        .enumerate()
        .map(|(i, (plan, _))| TapeEntry {
            plan: *plan,
            stop_on_port: Some(plan.success_port),
            branch: explicit_branches.then_some([(i + 1).min(n - 1); 2]),
        })
        .collect();
    Ok(InstructionTape { strategy: kind, alpha: alpha.value(), target: TargetRule::exact(), entries, packet_size: n as u64, quantile: q })
}

/// Compiles `kind` into a tape whose packet succeeds with probability at
/// least `q`.
///
/// `epsilon` is the target half-width used by the unguided walk only.
pub fn plan_session(kind: StrategyKind, alpha: CouplingStrength, q: f64, epsilon: f64) -> Result<InstructionTape> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("quantile level {q} outside (0, 1)")));
    }
    let rule = kind.target_rule(epsilon)?;
    let xb = StepPlan::new(alpha, xbasis_config(), Port::One)?;
    match kind {
        StrategyKind::Unguided => {
            let exact = unguided_exact(alpha, &rule, MAX_PACKET as usize, (1.0 - q) * 1e-3);
            let n = exact
                .quantile(q)?
                .ok_or_else(|| Error::Unsupported(format!("unguided walk needs more than {MAX_PACKET} ancillae at q = {q}")))?;
            let entry = TapeEntry { plan: xb, stop_on_port: None, branch: Some([0, 0]) };
            Ok(InstructionTape { strategy: kind, alpha: alpha.value(), target: rule, entries: vec![entry], packet_size: n, quantile: q })
        }
        StrategyKind::FlipUndo => {
            let flipped = apply_flip(&xbasis_config());
            let entries = vec![
                TapeEntry { plan: xb, stop_on_port: Some(Port::One), branch: Some([1, 0]) },
                // Port 0 undoes the failure; port 1 overshoots.
                TapeEntry { plan: StepPlan::new(alpha, flipped, Port::One)?, stop_on_port: None, branch: Some([0, 2]) },
                TapeEntry { plan: StepPlan::new(alpha, flipped, Port::Zero)?, stop_on_port: Some(Port::Zero), branch: Some([2, 1]) },
            ];
            let packet_size = if rule.reached(xb.failure_phase) { 1 } else { flip_undo_quantile(xb.success_prob, q)? };
            Ok(InstructionTape { strategy: kind, alpha: alpha.value(), target: rule, entries, packet_size, quantile: q })
        }
        StrategyKind::OneStep(mode) => match (mode.ports, mode.dof) {
            (Ports::One, _) => chain_tape(kind, alpha, q, false),
            (Ports::Two, Dof::One) => chain_tape(kind, alpha, q, true),
            (Ports::Two, Dof::Two) => {
                Err(Error::Unsupported("two-port two-dof steering is not compiled to a finite tape; use a one-dof mode".into()))
            }
        },
    }
}

/// Bob's side of one session.
pub fn execute_session(tape: &InstructionTape, alpha: CouplingStrength, rng: &mut impl Rng) -> Result<SessionTranscript> {
    tape.validate()?;
    // Bob's physical coupling fixes the actual port statistics and angles.
    let plans = if alpha.value() == tape.alpha {
        tape.entries.iter().map(|e| e.plan).collect::<Vec<_>>()
    } else {
        tape.entries.iter().map(|e| StepPlan::new(alpha, e.plan.config, e.plan.success_port)).collect::<Result<Vec<_>>>()?
    };
    let mut state = WalkState::origin();
    let mut at = 0;
    let mut outcomes = Vec::new();
    let mut stopped = false;
    while state.steps < tape.packet_size {
        let port = sample_port(&plans[at], rng);
        outcomes.push(port.index() as u8);
        state = advance(&state, &plans[at], port, &tape.target);
        if state.done || tape.entries[at].stop_on_port == Some(port) {
            stopped = true;
            break;
        }
        at = tape.next_entry(at, port);
    }
    Ok(SessionTranscript {
        strategy: tape.strategy.label(),
        alpha: alpha.value(),
        seed: None,
        packet_size: tape.packet_size,
        stopped_at: state.steps,
        final_position: state.position,
        succeeded: stopped && tape.target.reached(state.position),
        discarded: tape.packet_size - state.steps,
        outcomes,
        messages_alice_to_bob: 1,
        messages_bob_to_alice: 1,
    })
}

/// True iff the session stopped inside `π ± max(epsilon, 1e-9)`.
pub fn verify_transcript(t: &SessionTranscript, epsilon: f64) -> bool {
    t.succeeded && wrap_angle(t.final_position - PI).abs() <= epsilon.max(1e-9)
}

/// Recomputes the final position from the recorded outcomes.
pub fn replay_transcript(tape: &InstructionTape, alpha: CouplingStrength, t: &SessionTranscript) -> Result<f64> {
    tape.validate()?;
    let mut state = WalkState::origin();
    let mut at = 0;
    for &bit in &t.outcomes {
        let port = Port::from_bit(bit).ok_or_else(|| Error::Parse(format!("outcome bit {bit}")))?;
        let plan = StepPlan::new(alpha, tape.entries[at].plan.config, tape.entries[at].plan.success_port)?;
        state = advance(&state, &plan, port, &tape.target);
        at = tape.next_entry(at, port);
    }
    Ok(state.position)
}

/// Aggregate of many independent sessions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub sessions: u64,
    pub failures: u64,
    /// Ancillae consumed by successful sessions.
    pub hitting: HittingDistribution,
    pub discarded: u64,
    pub mid_session_messages: u64,
}

impl SessionStats {
    fn merge(mut self, o: &SessionStats) -> Self {
        self.sessions += o.sessions;
        self.failures += o.failures;
        self.hitting = self.hitting.merge(&o.hitting);
        self.discarded += o.discarded;
        self.mid_session_messages += o.mid_session_messages;
        self
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.sessions as f64
    }
}

/// Runs `n` sessions, session `i` drawing from stream `i` of `seed`.
pub fn run_sessions(tape: &InstructionTape, alpha: CouplingStrength, n: u64, seed: u64) -> Result<SessionStats> {
    (0..n)
        .into_par_iter()
        .try_fold(SessionStats::default, |mut acc, i| {
            let t = execute_session(tape, alpha, &mut derive_stream(seed, i))?;
            acc.sessions += 1;
            if t.succeeded {
                acc.hitting.record(t.stopped_at);
            } else {
                acc.failures += 1;
            }
            acc.discarded += t.discarded;
            acc.mid_session_messages += t.messages_alice_to_bob + t.messages_bob_to_alice - 2;
            Ok(acc)
        })
        .try_reduce(SessionStats::default, |a, b| Ok(a.merge(&b)))
}

/// Line-oriented record: `# key: value` header lines, then one outcome bit
/// per line.
pub fn write_transcript(t: &SessionTranscript, mut out: impl Write) -> Result<()> {
    let mut s = String::new();
    let seed = t.seed.map_or_else(|| "none".to_string(), |v| v.to_string());
    let _ = writeln!(s, "# strategy: {}", t.strategy);
    let _ = writeln!(s, "# alpha: {:?}", t.alpha);
    let _ = writeln!(s, "# seed: {seed}");
    let _ = writeln!(s, "# packet_size: {}", t.packet_size);
    let _ = writeln!(s, "# stopped_at: {}", t.stopped_at);
    let _ = writeln!(s, "# final_position: {:?}", t.final_position);
    let _ = writeln!(s, "# succeeded: {}", t.succeeded);
    let _ = writeln!(s, "# discarded: {}", t.discarded);
    let _ = writeln!(s, "# messages_alice_to_bob: {}", t.messages_alice_to_bob);
    let _ = writeln!(s, "# messages_bob_to_alice: {}", t.messages_bob_to_alice);
    for b in &t.outcomes {
        let _ = writeln!(s, "{b}");
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_transcript(input: impl BufRead) -> Result<SessionTranscript> {
    let mut t = SessionTranscript {
        strategy: String::new(),
        alpha: f64::NAN,
        seed: None,
        packet_size: 0,
        outcomes: Vec::new(),
        stopped_at: 0,
        final_position: f64::NAN,
        succeeded: false,
        discarded: 0,
        messages_alice_to_bob: 0,
        messages_bob_to_alice: 0,
    };
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse().map_err(|_| Error::Parse(format!("bad value '{v}' for {key}")))
    }
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let (k, v) = h.split_once(':').ok_or_else(|| Error::Parse(format!("line {}: header without ':'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "strategy" => t.strategy = v.to_string(),
                "alpha" => t.alpha = num(k, v)?,
                "seed" => t.seed = if v == "none" { None } else { Some(num(k, v)?) },
                "packet_size" => t.packet_size = num(k, v)?,
                "stopped_at" => t.stopped_at = num(k, v)?,
                "final_position" => t.final_position = num(k, v)?,
                "succeeded" => t.succeeded = num(k, v)?,
                "discarded" => t.discarded = num(k, v)?,
                "messages_alice_to_bob" => t.messages_alice_to_bob = num(k, v)?,
                "messages_bob_to_alice" => t.messages_bob_to_alice = num(k, v)?,
                _ => {}
            }
        } else {
            match line {
                "0" => t.outcomes.push(0),
                "1" => t.outcomes.push(1),
                other => return Err(Error::Parse(format!("line {}: expected outcome bit, got '{other}'", lineno + 1))),
            }
        }
    }
    if t.outcomes.len() as u64 != t.stopped_at {
        return Err(Error::Parse(format!("{} outcome lines but stopped_at = {}", t.outcomes.len(), t.stopped_at)));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::ControlMode;
    use std::f64::consts::FRAC_PI_4;

    fn alpha(a: f64) -> CouplingStrength {
        CouplingStrength::new(a).unwrap()
    }

    #[test]
    fn flip_undo_tape_shape() {
        let tape = plan_session(StrategyKind::FlipUndo, alpha(PI / 16.0), 0.999, 0.0).unwrap();
        assert_eq!(tape.packet_size, 95);
        assert_eq!(tape.entries.len(), 3);
        assert!(tape.entries.iter().all(|e| e.branch.is_some()));
        tape.validate().unwrap();
    }

    #[test]
    fn maximal_coupling_needs_one_ancilla() {
        for kind in [StrategyKind::Unguided, StrategyKind::FlipUndo, StrategyKind::OneStep(ControlMode::ONE_PORT)] {
            let tape = plan_session(kind, alpha(FRAC_PI_4), 0.999, PI / 100.0).unwrap();
            assert_eq!(tape.packet_size, 1, "{kind:?}");
            let mut rng = derive_stream(5, 0);
            for _ in 0..50 {
                let t = execute_session(&tape, alpha(FRAC_PI_4), &mut rng).unwrap();
                assert_eq!(t.stopped_at, 1);
                assert!(verify_transcript(&t, 0.0));
            }
        }
    }

    #[test]
    fn one_port_tape_stops_on_port_one() {
        let tape = plan_session(StrategyKind::OneStep(ControlMode::ONE_PORT), alpha(PI / 16.0), 0.999, 0.0).unwrap();
        assert!(tape.entries.iter().all(|e| e.stop_on_port == Some(Port::One) && e.branch.is_none()));
        assert_eq!(tape.packet_size as usize, tape.entries.len());
    }

    #[test]
    fn two_port_two_dof_is_rejected() {
        let r = plan_session(StrategyKind::OneStep(ControlMode::TWO_PORT_TWO_DOF), alpha(0.7), 0.999, 0.0);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn two_port_one_dof_uses_branch_tables() {
        let tape = plan_session(StrategyKind::OneStep(ControlMode::TWO_PORT_ONE_DOF), alpha(0.7), 0.999, 0.0).unwrap();
        tape.validate().unwrap();
        assert!(tape.entries.iter().all(|e| e.branch.is_some()));
    }

    #[test]
    fn transcript_roundtrip_and_replay() {
        let a = alpha(PI / 16.0);
        let tape = plan_session(StrategyKind::FlipUndo, a, 0.999, 0.0).unwrap();
        for i in 0..20 {
            let mut t = execute_session(&tape, a, &mut derive_stream(9, i)).unwrap();
            t.seed = Some(9);
            assert_eq!(replay_transcript(&tape, a, &t).unwrap(), t.final_position);
            let mut buf = Vec::new();
            write_transcript(&t, &mut buf).unwrap();
            assert_eq!(read_transcript(buf.as_slice()).unwrap(), t);
        }
    }

    #[test]
    fn failed_session_does_not_verify() {
        let a = alpha(PI / 16.0);
        let mut tape = plan_session(StrategyKind::FlipUndo, a, 0.999, 0.0).unwrap();
        tape.packet_size = 1;
        let stats = run_sessions(&tape, a, 2000, 1).unwrap();
        assert!(stats.failures > 1500);
        let t = (0..).map(|i| execute_session(&tape, a, &mut derive_stream(1, i)).unwrap()).find(|t| !t.succeeded).unwrap();
        assert!(!verify_transcript(&t, 0.1));
        assert_eq!(t.discarded, 0);
    }

    #[test]
    fn malformed_records_are_rejected() {
        assert!(read_transcript("# stopped_at: 2\n0\n".as_bytes()).is_err());
        assert!(read_transcript("# stopped_at: 1\n7\n".as_bytes()).is_err());
        assert!(read_transcript("# alpha: x\n".as_bytes()).is_err());
    }
}
