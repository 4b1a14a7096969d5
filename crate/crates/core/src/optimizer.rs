//! Per-step parameter search.
//!
//! Settings are drawn from [`StepConfig::steered`], whose two free
//! parameters are the preparation polar angle and the measurement polar
//! angle, both searched over `(0, π/2]` (the family is mirror-symmetric
//! about `π/2` in each). One-dof control fixes one of them at `π/2`.
//! Angle matching is a 1024-point scan followed by bisection to `1e-12`;
//! the two-dof search wraps that in a coarse grid plus golden-section
//! refinement over the measurement angle.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::CouplingStrength;
use crate::stepmodel::{apply_flip, characterize_step, xbasis_config, Port, StepConfig, StepOutcome};
use crate::strategies::wrap_angle;

pub const SCAN_POINTS: usize = 1024;
pub const PARAM_TOL: f64 = 1e-12;
/// Largest allowed mismatch between a plan's realized and requested angle.
pub const PHASE_TOL: f64 = 1e-9;

const OUTER_GRID: usize = 32;
const GOLDEN_TOL: f64 = 1e-7;
const PARAM_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ports {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dof {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlMode {
    pub ports: Ports,
    pub dof: Dof,
}

impl ControlMode {
    pub const ONE_PORT: ControlMode = ControlMode { ports: Ports::One, dof: Dof::One };
    pub const TWO_PORT_ONE_DOF: ControlMode = ControlMode { ports: Ports::Two, dof: Dof::One };
    pub const TWO_PORT_TWO_DOF: ControlMode = ControlMode { ports: Ports::Two, dof: Dof::Two };

    pub fn new(ports: Ports, dof: Dof) -> Self {
        Self { ports, dof }
    }

    pub fn label(&self) -> &'static str {
        match (self.ports, self.dof) {
            (Ports::One, Dof::One) => "1p1d",
            (Ports::One, Dof::Two) => "1p2d",
            (Ports::Two, Dof::One) => "2p1d",
            (Ports::Two, Dof::Two) => "2p2d",
        }
    }
}

/// Which single parameter a one-dof search varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreeParameter {
    Preparation,
    Measurement,
}

/// Settings for one step together with what they achieve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub config: StepConfig,
    pub outcome: StepOutcome,
    pub success_port: Port,
    pub success_phase: f64,
    pub success_prob: f64,
    pub failure_phase: f64,
}

impl StepPlan {
    /// Characterizes `config` and designates `success_port`.
    pub fn new(alpha: CouplingStrength, config: StepConfig, success_port: Port) -> Result<Self> {
        let outcome = characterize_step(alpha, &config);
        if !outcome.valid {
            return Err(Error::InvalidPlan(format!("settings {config:?} give non-unitary back-action")));
        }
        Ok(Self {
            config,
            outcome,
            success_port,
            success_phase: outcome.phase(success_port),
            success_prob: outcome.probability(success_port),
            failure_phase: outcome.phase(success_port.other()),
        })
    }

    pub fn phase(&self, port: Port) -> f64 {
        self.outcome.phase(port)
    }

    pub fn probability(&self, port: Port) -> f64 {
        self.outcome.probability(port)
    }

    pub fn failure_prob(&self) -> f64 {
        self.outcome.probability(self.success_port.other())
    }
}

fn evaluate(alpha: CouplingStrength, prep: f64, meas: f64) -> StepOutcome {
    characterize_step(alpha, &StepConfig::steered(alpha, prep, meas))
}

fn scan_grid() -> impl Iterator<Item = f64> {
    std::iter::once(PARAM_FLOOR).chain((1..=SCAN_POINTS).map(|k| FRAC_PI_2 * k as f64 / SCAN_POINTS as f64))
}

/// All roots of `f` on `(0, π/2]` found by a grid scan and bisection.
pub(crate) fn scan_roots(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x in scan_grid() {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx.abs() <= 1e-13 {
            roots.push(x);
        } else if let Some((xp, fp)) = prev {
            if fp.abs() > 1e-13 && fp.signum() != fx.signum() {
                roots.push(bisect(&f, xp, fp, x));
            }
        }
        prev = Some((x, fx));
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, f_lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f_lo.signum();
    while hi - lo > PARAM_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of `g` on `[lo, hi]`.
pub(crate) fn golden_max(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut ga, mut gb) = (g(a), g(b));
    while hi - lo > tol {
        if ga >= gb {
            hi = b;
            b = a;
            gb = ga;
            a = hi - inv_phi * (hi - lo);
            ga = g(a);
        } else {
            lo = a;
            a = b;
            ga = gb;
            b = lo + inv_phi * (hi - lo);
            gb = g(b);
        }
    }
    if ga >= gb {
        (a, ga)
    } else {
        (b, gb)
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    prep: f64,
    meas: f64,
    prob: f64,
}

/// Best candidate on a one-parameter line where `|Φ_port| = magnitude`.
fn best_on_line(alpha: CouplingStrength, port: Port, magnitude: f64, point: impl Fn(f64) -> (f64, f64)) -> Option<Candidate> {
    let mismatch = |x: f64| {
        let (p, m) = point(x);
        let o = evaluate(alpha, p, m);
        if o.valid {
            o.phase(port).abs() - magnitude
        } else {
            f64::NAN
        }
    };
    scan_roots(mismatch)
        .into_iter()
        .filter_map(|x| {
            let (prep, meas) = point(x);
            let o = evaluate(alpha, prep, meas);
            (o.valid && (o.phase(port).abs() - magnitude).abs() <= PHASE_TOL).then_some(Candidate { prep, meas, prob: o.probability(port) })
        })
        .max_by(|a, b| a.prob.total_cmp(&b.prob))
}

fn one_dof(alpha: CouplingStrength, port: Port, magnitude: f64, free: FreeParameter) -> Option<Candidate> {
    match free {
        FreeParameter::Preparation => best_on_line(alpha, port, magnitude, |x| (x, FRAC_PI_2)),
        FreeParameter::Measurement => best_on_line(alpha, port, magnitude, |x| (FRAC_PI_2, x)),
    }
}

fn two_dof(alpha: CouplingStrength, port: Port, magnitude: f64) -> Option<Candidate> {
    let at = |meas: f64| best_on_line(alpha, port, magnitude, |x| (x, meas));
    let score = |meas: f64| at(meas).map_or(-1.0, |c| c.prob);

    let grid: Vec<f64> = (1..=OUTER_GRID).map(|k| FRAC_PI_2 * k as f64 / OUTER_GRID as f64).collect();
    let scores: Vec<f64> = grid.iter().map(|&m| score(m)).collect();
    let (k_best, &s_best) = scores.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;

    let mut best: Option<Candidate> = None;
    let mut consider = |c: Option<Candidate>| {
        if let Some(c) = c {
            if best.is_none_or(|b| c.prob > b.prob) {
                best = Some(c);
            }
        }
    };
    if s_best >= 0.0 {
        let lo = if k_best == 0 { PARAM_FLOOR } else { grid[k_best - 1] };
        let hi = grid[(k_best + 1).min(grid.len() - 1)];
        let (m, _) = golden_max(score, lo, hi, GOLDEN_TOL);
        consider(at(m));
        consider(at(grid[k_best]));
    }
    consider(one_dof(alpha, port, magnitude, FreeParameter::Preparation));
    consider(one_dof(alpha, port, magnitude, FreeParameter::Measurement));
    best
}

/// Turns a candidate into a plan whose `port` realizes exactly `target`.
fn signed_plan(alpha: CouplingStrength, c: Candidate, port: Port, target: f64) -> Result<StepPlan> {
    let config = StepConfig::steered(alpha, c.prep, c.meas);
    let plan = StepPlan::new(alpha, config, port)?;
    if wrap_angle(plan.success_phase - target).abs() <= PHASE_TOL {
        return Ok(plan);
    }
    let flipped = StepPlan::new(alpha, apply_flip(&config), port)?;
    if wrap_angle(flipped.success_phase - target).abs() <= PHASE_TOL {
        return Ok(flipped);
    }
    Err(Error::NoSolution(format!("port {:?} realizes {} instead of {target}", port, plan.success_phase)))
}

fn xbasis_plan(alpha: CouplingStrength) -> Result<StepPlan> {
    StepPlan::new(alpha, xbasis_config(), Port::One)
}

fn check_target(target: f64) -> Result<f64> {
    if !target.is_finite() || target == 0.0 || target.abs() > PI + 1e-12 {
        return Err(Error::InvalidArgument(format!("target angle {target} outside 0 < |target| ≤ π")));
    }
    Ok(wrap_angle(target))
}

/// Settings whose port 1 generates `target` with maximal probability.
pub fn solve_port1(alpha: CouplingStrength, target: f64, dof: Dof) -> Result<StepPlan> {
    let target = check_target(target)?;
    if target.abs() >= PI - 1e-12 {
        return xbasis_plan(alpha);
    }
    let best = match dof {
        Dof::One => one_dof(alpha, Port::One, target.abs(), FreeParameter::Preparation),
        Dof::Two => two_dof(alpha, Port::One, target.abs()),
    };
    let c = best.ok_or_else(|| Error::NoSolution(format!("port 1 cannot bracket |Φ| = {} at α = {}", target.abs(), alpha.value())))?;
    signed_plan(alpha, c, Port::One, target)
}

/// One-dof port-1 search that varies the measurement angle instead of the
/// preparation.
pub fn solve_port1_by_measurement(alpha: CouplingStrength, target: f64) -> Result<StepPlan> {
    let target = check_target(target)?;
    if target.abs() >= PI - 1e-12 {
        return xbasis_plan(alpha);
    }
    let c = one_dof(alpha, Port::One, target.abs(), FreeParameter::Measurement)
        .ok_or_else(|| Error::NoSolution(format!("port 1 cannot bracket |Φ| = {}", target.abs())))?;
    signed_plan(alpha, c, Port::One, target)
}

/// Largest `|Φ₀|` available at `alpha`: the port-0 angle of the X-basis step.
pub fn max_port0_angle(alpha: CouplingStrength) -> f64 {
    characterize_step(alpha, &xbasis_config()).phi_port0.abs()
}

/// Settings whose port 0 generates `target` with maximal probability, if
/// port 0 can reach it at this coupling.
pub fn solve_port0(alpha: CouplingStrength, target: f64, dof: Dof) -> Option<StepPlan> {
    let target = check_target(target).ok()?;
    if target.abs() >= PI - 1e-12 || target.abs() > max_port0_angle(alpha) + PHASE_TOL {
        return None;
    }
    let best = match dof {
        Dof::One => one_dof(alpha, Port::Zero, target.abs(), FreeParameter::Preparation),
        Dof::Two => two_dof(alpha, Port::Zero, target.abs()),
    }?;
    signed_plan(alpha, best, Port::Zero, target).ok()
}

/// Coupling at which the first step's failure angle reaches `π/2`, the
/// onset of two-port viability.
pub fn threshold_alpha(tol: f64) -> Result<CouplingStrength> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let excess = |a: f64| -> Result<f64> {
        let plan = solve_port1(CouplingStrength::new(a)?, PI, Dof::One)?;
        Ok(plan.failure_phase.abs() - FRAC_PI_2)
    };
    let (mut lo, mut hi) = (1e-6, CouplingStrength::MAX);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    CouplingStrength::new(0.5 * (lo + hi))
}

/// Plan for the next step given the signed angle still to travel.
pub fn best_step(alpha: CouplingStrength, remaining: f64, mode: ControlMode) -> Result<StepPlan> {
    let remaining = check_target(remaining)?;
    if remaining.abs() >= PI - 1e-12 {
        return xbasis_plan(alpha);
    }
    let via_port1 = solve_port1(alpha, remaining, mode.dof);
    if mode.ports == Ports::One {
        return via_port1;
    }
    match (solve_port0(alpha, remaining, mode.dof), via_port1) {
        (Some(p0), Ok(p1)) => Ok(if p0.success_prob >= p1.success_prob { p0 } else { p1 }),
        (Some(p0), Err(_)) => Ok(p0),
        (None, p1) => p1,
    }
}
