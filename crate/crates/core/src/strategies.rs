//! Walk on the circle of controlled-phase angles and the policies that pick
//! each step's settings.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{best_step, ControlMode, StepPlan};
use crate::qcore::CouplingStrength;
use crate::stepmodel::{apply_flip, xbasis_config, Port};

/// Tolerance for exact landings and loop-node membership.
pub const LANDING_TOL: f64 = 1e-9;

/// Wraps `x` into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = (x + PI).rem_euclid(two_pi) - PI;
    if y <= -PI {
        y += two_pi;
    }
    y
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkState {
    /// Accumulated controlled-phase angle.
    pub position: f64,
    pub steps: u64,
    pub done: bool,
}

impl WalkState {
    pub fn origin() -> Self {
        Self { position: 0.0, steps: 0, done: false }
    }
}

impl Default for WalkState {
    fn default() -> Self {
        Self::origin()
    }
}

/// Target region `π ± epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRule {
    pub epsilon: f64,
}

impl TargetRule {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..PI).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, π)")));
        }
        Ok(Self { epsilon })
    }

    /// Exact landing on `π`.
    pub fn exact() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn reached(&self, position: f64) -> bool {
        wrap_angle(position - PI).abs() <= self.epsilon.max(LANDING_TOL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    Unguided,
    OneStep(ControlMode),
    FlipUndo,
}

impl StrategyKind {
    pub fn is_guided(&self) -> bool {
        !matches!(self, StrategyKind::Unguided)
    }

    /// Stopping rule actually used by this strategy: guided strategies aim
    /// for exact landings, so `epsilon` only applies to the unguided walk.
    pub fn target_rule(&self, epsilon: f64) -> Result<TargetRule> {
        if self.is_guided() {
            Ok(TargetRule::exact())
        } else {
            TargetRule::new(epsilon)
        }
    }

    pub fn label(&self) -> String {
        match self {
            StrategyKind::Unguided => "unguided".into(),
            StrategyKind::FlipUndo => "flip-undo".into(),
            StrategyKind::OneStep(mode) => format!("one-step-{}", mode.label()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        use crate::optimizer::{Dof, Ports};
        let mode = |ports, dof| StrategyKind::OneStep(ControlMode::new(ports, dof));
        Ok(match s {
            "unguided" => StrategyKind::Unguided,
            "flip-undo" | "flipundo" => StrategyKind::FlipUndo,
            "one-step" | "one-step-1p1d" | "1p1d" => mode(Ports::One, Dof::One),
            "one-step-1p2d" | "1p2d" => mode(Ports::One, Dof::Two),
            "one-step-2p1d" | "2p1d" => mode(Ports::Two, Dof::One),
            "one-step-2p2d" | "2p2d" => mode(Ports::Two, Dof::Two),
            other => return Err(Error::Parse(format!("unknown strategy '{other}'"))),
        })
    }
}

/// Signed angle from the current position to `π`.
pub fn remaining_to_target(state: &WalkState) -> f64 {
    wrap_angle(PI - state.position)
}

/// Node of the flip-undo loop `{0, γ, γ − π}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopNode {
    Origin,
    Failed,
    Overshot,
}

pub fn flip_undo_node(alpha: CouplingStrength, position: f64) -> Result<LoopNode> {
    let gamma = crate::stepmodel::characterize_step(alpha, &xbasis_config()).phi_port0;
    node_on_loop(gamma, position)
}

fn node_on_loop(gamma: f64, position: f64) -> Result<LoopNode> {
    let nodes = [(LoopNode::Origin, 0.0), (LoopNode::Failed, gamma), (LoopNode::Overshot, wrap_angle(gamma + PI))];
    nodes
        .iter()
        .map(|&(node, at)| (node, wrap_angle(position - at).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|&(_, d)| d <= 1e-6)
        .map(|(node, _)| node)
        .ok_or_else(|| Error::InvalidPlan(format!("position {position} is off the flip-undo loop")))
}

fn flip_undo_plan(alpha: CouplingStrength, node: LoopNode) -> Result<StepPlan> {
    match node {
        LoopNode::Origin => StepPlan::new(alpha, xbasis_config(), Port::One),
        // Port 0 undoes γ; port 1 overshoots to γ − π.
        LoopNode::Failed => StepPlan::new(alpha, apply_flip(&xbasis_config()), Port::One),
        // Port 0 completes to π; port 1 returns to γ.
        LoopNode::Overshot => StepPlan::new(alpha, apply_flip(&xbasis_config()), Port::Zero),
    }
}

/// Chooses the settings for the next step.
pub fn strategy_next(kind: StrategyKind, alpha: CouplingStrength, state: &WalkState) -> Result<StepPlan> {
    if state.done {
        return Err(Error::InvalidArgument("walk already finished".into()));
    }
    match kind {
        StrategyKind::Unguided => StepPlan::new(alpha, xbasis_config(), Port::One),
        StrategyKind::OneStep(mode) => best_step(alpha, remaining_to_target(state), mode),
        StrategyKind::FlipUndo => flip_undo_plan(alpha, flip_undo_node(alpha, state.position)?),
    }
}

/// Applies the realized port of `plan` to `state`.
pub fn advance(state: &WalkState, plan: &StepPlan, outcome: Port, rule: &TargetRule) -> WalkState {
    let position = wrap_angle(state.position + plan.phase(outcome));
    WalkState { position, steps: state.steps + 1, done: rule.reached(position) }
}

/// Plans a one-step walk visits, in order, with the probability that each
/// one finishes the walk.
///
/// Failures move the walk deterministically, so the whole trajectory is a
/// single chain indexed by the failure count. Stops once the covered
/// hitting mass reaches `mass` or after `max_len` plans.
pub fn one_step_chain(alpha: CouplingStrength, mode: ControlMode, mass: f64, max_len: usize) -> Result<Vec<(StepPlan, f64)>> {
    let rule = TargetRule::exact();
    let mut state = WalkState::origin();
    let mut chain = Vec::new();
    let (mut covered, mut survive) = (0.0, 1.0);
    while covered < mass && chain.len() < max_len {
        let plan = best_step(alpha, remaining_to_target(&state), mode)?;
        let fail = advance(&state, &plan, plan.success_port.other(), &rule);
        let p = if fail.done { 1.0 } else { plan.success_prob };
        chain.push((plan, p));
        covered += survive * p;
        survive *= 1.0 - p;
        if fail.done {
            break;
        }
        state = fail;
    }
    Ok(chain)
}

/// [`strategy_next`] with memoization, for running many trials.
///
/// One-step plans are cached by remaining angle quantized at `1e-12`; the
/// unguided walk and the flip-undo loop use plans fixed at construction.
#[derive(Debug)]
pub struct Policy {
    kind: StrategyKind,
    alpha: CouplingStrength,
    fixed: Vec<StepPlan>,
    gamma: f64,
    cache: RwLock<HashMap<i64, StepPlan>>,
}

impl Policy {
    pub fn new(kind: StrategyKind, alpha: CouplingStrength) -> Result<Self> {
        let gamma = crate::stepmodel::characterize_step(alpha, &xbasis_config()).phi_port0;
        let fixed = match kind {
            StrategyKind::Unguided => vec![StepPlan::new(alpha, xbasis_config(), Port::One)?],
            StrategyKind::FlipUndo => [LoopNode::Origin, LoopNode::Failed, LoopNode::Overshot]
                .into_iter()
                .map(|node| flip_undo_plan(alpha, node))
                .collect::<Result<_>>()?,
            StrategyKind::OneStep(_) => Vec::new(),
        };
        Ok(Self { kind, alpha, fixed, gamma, cache: RwLock::new(HashMap::new()) })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn alpha(&self) -> CouplingStrength {
        self.alpha
    }

    pub fn next(&self, state: &WalkState) -> Result<StepPlan> {
        if state.done {
            return Err(Error::InvalidArgument("walk already finished".into()));
        }
        match self.kind {
            StrategyKind::Unguided => Ok(self.fixed[0]),
            StrategyKind::FlipUndo => Ok(self.fixed[node_on_loop(self.gamma, state.position)? as usize]),
            StrategyKind::OneStep(_) => {
                let key = (remaining_to_target(state) / 1e-12).round() as i64;
                if let Some(plan) = self.cache.read().expect("plan cache poisoned").get(&key) {
                    return Ok(*plan);
                }
                let plan = strategy_next(self.kind, self.alpha, state)?;
                self.cache.write().expect("plan cache poisoned").insert(key, plan);
                Ok(plan)
            }
        }
    }

    pub fn cached_plans(&self) -> usize {
        self.cache.read().expect("plan cache poisoned").len()
    }
}
