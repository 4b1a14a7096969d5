//! One mediated step: ancilla settings in, the two ports' controlled-phase
//! angles and probabilities out.
//!
//! The two measurement outcomes are relabelled as ports: port 1 is the
//! outcome with the larger `|Φ|` (the minor Bloch cap, probability at most
//! one half), port 0 the other. On a tie port 1 is the `−` outcome.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qcore::{
    bloch_state, bloch_vector, conditional_ancilla_states, controlled_phase_angle, proportional_unitary_check, rotation_unchecked,
    step_kraus, CouplingStrength, QubitState, SingleQubitOperator, UNITARY_TOL,
};
use crate::strategies::wrap_angle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    Zero,
    One,
}

impl Port {
    pub fn index(self) -> usize {
        match self {
            Port::Zero => 0,
            Port::One => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Port> {
        match bit {
            0 => Some(Port::Zero),
            1 => Some(Port::One),
            _ => None,
        }
    }

    pub fn other(self) -> Port {
        match self {
            Port::Zero => Port::One,
            Port::One => Port::Zero,
        }
    }
}

/// Raw measurement outcome: along the measurement axis (`Plus`) or against it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

impl Rotation {
    pub fn operator(&self) -> SingleQubitOperator {
        rotation_unchecked(self.axis, self.angle)
    }
}

/// Controllable ancilla settings for one mediated step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub prep_polar: f64,
    pub prep_azimuth: f64,
    /// Rotation applied between the two interactions.
    pub mid_rotation: Rotation,
    /// Reverse the sense of the first interaction with X gates around it.
    pub flip: bool,
    pub meas_polar: f64,
    pub meas_azimuth: f64,
}

impl StepConfig {
    pub fn new(prep: (f64, f64), mid_rotation: Rotation, flip: bool, meas: (f64, f64)) -> Result<Self> {
        let cfg = Self { prep_polar: prep.0, prep_azimuth: prep.1, mid_rotation, flip, meas_polar: meas.0, meas_azimuth: meas.1 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let angles = [self.prep_polar, self.prep_azimuth, self.mid_rotation.angle, self.meas_polar, self.meas_azimuth];
        if angles.iter().chain(self.mid_rotation.axis.iter()).any(|a| !a.is_finite()) {
            return invalid("step configuration contains non-finite values");
        }
        for polar in [self.prep_polar, self.meas_polar] {
            if !(0.0..=PI).contains(&polar) {
                return invalid(format!("polar angle {polar} outside [0, π]"));
            }
        }
        if !crate::qcore::is_unit(&self.mid_rotation.axis) {
            return invalid("mid rotation axis is not a unit vector");
        }
        Ok(())
    }

    /// Member of the two-parameter family of settings whose back-action is
    /// unitary at coupling `alpha`.
    ///
    /// The preparation lies in the x–z plane at `prep_polar`; the mid
    /// rotation brings both intermediate ancilla states into the x–z plane
    /// with mean polar angle `θ`, where `tan θ = tan(meas_polar)·cos 2α`,
    /// so that the x–z measurement axis at `meas_polar` passes through the
    /// centre of the circle carrying the four final states.
    pub fn steered(alpha: CouplingStrength, prep_polar: f64, meas_polar: f64) -> Self {
        let two_a = 2.0 * alpha.value();
        let (sin_chi, cos_chi) = prep_polar.sin_cos();
        // After R_z(±2α) and R_x(π/2) both intermediate states share this
        // (x, y) projection.
        let (px, py) = (sin_chi * two_a.cos(), -cos_chi);
        let psi = if px.abs() < 1e-15 && py.abs() < 1e-15 { 0.0 } else { py.atan2(px) };
        let theta =
            if (meas_polar - FRAC_PI_2).abs() < 1e-15 { FRAC_PI_2 } else { (meas_polar.sin() * two_a.cos()).atan2(meas_polar.cos()) };
        let mid = rotation_unchecked([0.0, 1.0, 0.0], theta - FRAC_PI_2)
            * rotation_unchecked([0.0, 0.0, 1.0], -psi)
            * rotation_unchecked([1.0, 0.0, 0.0], FRAC_PI_2);
        let (axis, angle) = mid.su2_axis_angle();
        Self { prep_polar, prep_azimuth: 0.0, mid_rotation: Rotation { axis, angle }, flip: false, meas_polar, meas_azimuth: 0.0 }
    }

    pub fn with_flip(mut self, flip: bool) -> Self {
        self.flip = flip;
        self
    }

    pub fn prep_state(&self) -> QubitState {
        bloch_state(self.prep_polar, self.prep_azimuth)
    }

    pub fn mid_operator(&self) -> SingleQubitOperator {
        self.mid_rotation.operator()
    }

    pub fn measurement_axis(&self) -> [f64; 3] {
        let (st, ct) = self.meas_polar.sin_cos();
        let (sp, cp) = self.meas_azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `(|m₊⟩, |m₋⟩)`.
    pub fn measurement_states(&self) -> (QubitState, QubitState) {
        (bloch_state(self.meas_polar, self.meas_azimuth), bloch_state(PI - self.meas_polar, self.meas_azimuth + PI))
    }
}

/// Port angles and probabilities of one step.
///
/// When `valid` is false the angles and probabilities are NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub phi_port0: f64,
    pub phi_port1: f64,
    pub p_port0: f64,
    pub p_port1: f64,
    pub valid: bool,
    /// Which raw measurement outcome realizes port 1.
    pub port1_outcome: Outcome,
}

impl StepOutcome {
    pub fn invalid() -> Self {
        Self { phi_port0: f64::NAN, phi_port1: f64::NAN, p_port0: f64::NAN, p_port1: f64::NAN, valid: false, port1_outcome: Outcome::Minus }
    }

    pub fn phase(&self, port: Port) -> f64 {
        match port {
            Port::Zero => self.phi_port0,
            Port::One => self.phi_port1,
        }
    }

    pub fn probability(&self, port: Port) -> f64 {
        match port {
            Port::Zero => self.p_port0,
            Port::One => self.p_port1,
        }
    }

    pub fn port_of(&self, outcome: Outcome) -> Port {
        if outcome == self.port1_outcome {
            Port::One
        } else {
            Port::Zero
        }
    }
}

/// Wraps into `(−π, π]` and snaps angles within `1e-12` of `±π` to `π`,
/// since `C(π)` and `C(−π)` are the same gate.
pub fn canonical_phase(x: f64) -> f64 {
    let y = wrap_angle(x);
    if PI - y.abs() < 1e-12 {
        PI
    } else {
        y
    }
}

pub fn characterize_step(alpha: CouplingStrength, config: &StepConfig) -> StepOutcome {
    let (kp, km) = step_kraus(alpha, config);
    let (Some(pp), Some(pm)) = (proportional_unitary_check(&kp, UNITARY_TOL), proportional_unitary_check(&km, UNITARY_TOL)) else {
        return StepOutcome::invalid();
    };
    // A port that never fires carries no angle; treat it as the trivial gate.
    let phase = |k, p: f64| if p < 1e-300 { Ok(0.0) } else { controlled_phase_angle(k) };
    let (Ok(phi_p), Ok(phi_m)) = (phase(&kp, pp), phase(&km, pm)) else {
        return StepOutcome::invalid();
    };
    let (phi_p, phi_m) = (canonical_phase(phi_p), canonical_phase(phi_m));
    let minus_is_port1 = phi_m.abs() >= phi_p.abs() - 1e-12;
    if minus_is_port1 {
        StepOutcome { phi_port0: phi_p, phi_port1: phi_m, p_port0: pp, p_port1: pm, valid: true, port1_outcome: Outcome::Minus }
    } else {
        StepOutcome { phi_port0: phi_m, phi_port1: phi_p, p_port0: pm, p_port1: pp, valid: true, port1_outcome: Outcome::Plus }
    }
}

/// Preparation and measurement in the X eigenbasis with `R_x(π/2)` between
/// the interactions.
pub fn xbasis_config() -> StepConfig {
    StepConfig {
        prep_polar: FRAC_PI_2,
        prep_azimuth: 0.0,
        mid_rotation: Rotation { axis: [1.0, 0.0, 0.0], angle: FRAC_PI_2 },
        flip: false,
        meas_polar: FRAC_PI_2,
        meas_azimuth: 0.0,
    }
}

/// Closed form of [`characterize_step`] for [`xbasis_config`]:
/// `Φ₁ = π`, `p₁ = sin²(2α)/2`, `Φ₀ = −4·arctan(tan²α)`.
pub fn xbasis_closed_form(alpha: CouplingStrength) -> StepOutcome {
    let a = alpha.value();
    let p1 = (2.0 * a).sin().powi(2) / 2.0;
    StepOutcome {
        phi_port0: canonical_phase(-4.0 * a.tan().powi(2).atan()),
        phi_port1: PI,
        p_port0: 1.0 - p1,
        p_port1: p1,
        valid: true,
        port1_outcome: Outcome::Minus,
    }
}

pub fn apply_flip(config: &StepConfig) -> StepConfig {
    config.with_flip(!config.flip)
}

/// Bloch vectors of the final ancilla states for `(i, j)` in
/// `00, 01, 10, 11` order.
pub fn bloch_points(alpha: CouplingStrength, config: &StepConfig) -> [[f64; 3]; 4] {
    conditional_ancilla_states(alpha, config).map(|s| bloch_vector(&s))
}

/// True when all `points` have the same projection on `axis` within `tol`,
/// i.e. they lie on one circle whose centre is on the axis.
pub fn concyclic_about(points: &[[f64; 3]; 4], axis: &[f64; 3], tol: f64) -> bool {
    let dots = points.map(|p| p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2]);
    let lo = dots.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= tol
}
