//! Stochastic generation of a CZ gate between two remote register qubits
//! mediated by flying ancillas with a fixed, arbitrary coupling strength.
//!
//! Each mediated step applies a controlled-phase gate `C(Φ)` whose angle
//! depends on the ancilla measurement outcome, so the accumulated gate
//! performs a random walk on the circle of controlled-phase angles. The
//! crate covers the whole pipeline:
//!
//! - [`qcore`]: two-level operators, the `e^{-iα σz⊗σz}` interaction and
//!   Kraus extraction for the two-interaction ancilla circuit.
//! - [`stepmodel`]: maps ancilla settings to the two ports' angles and
//!   probabilities.
//! - [`optimizer`]: per-step search for settings that generate a required
//!   angle with maximal probability.
//! - [`strategies`]: the walk state machine and the unguided, one-step and
//!   flip-undo policies.
//! - [`analytics`]: closed-form statistics, bounds and hitting-time
//!   distributions.
//! - [`montecarlo`]: deterministic, parallel trial runner.
//! - [`protocol`]: Alice/Bob packet session emulation.
//! - [`experiments`]: figure datasets and the command-line front end.
//!
//! ```
//! use czwalk::{characterize_step, xbasis_config, CouplingStrength};
//! use std::f64::consts::PI;
//!
//! let alpha = CouplingStrength::new(PI / 16.0).unwrap();
//! let step = characterize_step(alpha, &xbasis_config());
//! assert!(step.valid);
//! assert!((step.phi_port1 - PI).abs() < 1e-12);
//! assert!((step.p_port1 - 0.0732233).abs() < 1e-7);
//! ```

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod optimizer;
pub mod protocol;
pub mod qcore;
pub mod stepmodel;
pub mod strategies;

pub use analytics::{HittingDistribution, SummaryStats};
pub use error::{Error, Result};
pub use montecarlo::{derive_stream, run_trials, RunSpec};
pub use optimizer::{best_step, solve_port0, solve_port1, threshold_alpha, ControlMode, Dof, Ports, StepPlan};
pub use protocol::{execute_session, plan_session, verify_transcript, InstructionTape, SessionTranscript};
pub use qcore::{CouplingStrength, DiagonalTwoQubitOperator, SingleQubitOperator};
pub use stepmodel::{apply_flip, bloch_points, characterize_step, xbasis_closed_form, xbasis_config, Port, StepConfig, StepOutcome};
pub use strategies::{advance, strategy_next, wrap_angle, StrategyKind, TargetRule, WalkState};
