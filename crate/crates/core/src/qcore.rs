//! Exact two-level quantum engine for the mediated-step circuit.
//!
//! Basis ordering for two-qubit register operators is `|00⟩, |01⟩, |10⟩,
//! |11⟩` with the first index the register qubit touched by the first
//! interaction. Rotations follow `R_n(θ) = exp(-i θ/2 n·σ)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::stepmodel::StepConfig;
use crate::strategies::wrap_angle;

pub type Amplitude = Complex64;

/// Single-qubit state as `[⟨0|ψ⟩, ⟨1|ψ⟩]`.
pub type QubitState = [Amplitude; 2];

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

/// A 2×2 complex operator acting on one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitOperator {
    entries: [[Amplitude; 2]; 2],
}

impl SingleQubitOperator {
    pub const fn new(entries: [[Amplitude; 2]; 2]) -> Self {
        Self { entries }
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn pauli_x() -> Self {
        Self::new([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn pauli_y() -> Self {
        Self::new([[ZERO, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), ZERO]])
    }

    pub const fn pauli_z() -> Self {
        Self::new([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new([[h, h], [h, -h]])
    }

    pub fn diagonal(d0: Amplitude, d1: Amplitude) -> Self {
        Self::new([[d0, ZERO], [ZERO, d1]])
    }

    pub fn entries(&self) -> &[[Amplitude; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row][col]
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0].conj(), e[1][0].conj()], [e[0][1].conj(), e[1][1].conj()]])
    }

    pub fn scale(&self, c: Amplitude) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0] * c, e[0][1] * c], [e[1][0] * c, e[1][1] * c]])
    }

    pub fn apply(&self, v: &QubitState) -> QubitState {
        let e = &self.entries;
        [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.dagger() * *self;
        let id = Self::identity();
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.entries[r][c] - id.entries[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }

    /// Decomposes an SU(2) element as `exp(-i angle/2 axis·σ)` with
    /// `angle ∈ [0, 2π]`. Identity maps to angle 0 about `x̂`.
    pub fn su2_axis_angle(&self) -> ([f64; 3], f64) {
        let e = &self.entries;
        let c = e[0][0].re;
        let sn = [-e[0][1].im, -e[0][1].re, -e[0][0].im];
        let s = (sn[0] * sn[0] + sn[1] * sn[1] + sn[2] * sn[2]).sqrt();
        if s < 1e-15 {
            return ([1.0, 0.0, 0.0], if c >= 0.0 { 0.0 } else { 2.0 * std::f64::consts::PI });
        }
        ([sn[0] / s, sn[1] / s, sn[2] / s], 2.0 * s.atan2(c))
    }
}

impl Mul for SingleQubitOperator {
    type Output = SingleQubitOperator;

    fn mul(self, rhs: Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::new(out)
    }
}

/// Diagonal operator on two qubits, entries ordered `|00⟩,|01⟩,|10⟩,|11⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalTwoQubitOperator {
    diag: [Amplitude; 4],
}

impl DiagonalTwoQubitOperator {
    pub const fn new(diag: [Amplitude; 4]) -> Self {
        Self { diag }
    }

    pub fn identity() -> Self {
        Self::new([ONE; 4])
    }

    /// `diag(e^{iφ1}, e^{iφ2}, e^{iφ3}, e^{iφ4})`.
    pub fn from_phases(phases: [f64; 4]) -> Self {
        Self::new(phases.map(|p| Complex64::from_polar(1.0, p)))
    }

    /// Canonical controlled-phase gate `diag(1, 1, 1, e^{iγ})`.
    pub fn controlled_phase(gamma: f64) -> Self {
        Self::from_phases([0.0, 0.0, 0.0, gamma])
    }

    pub fn diag(&self) -> &[Amplitude; 4] {
        &self.diag
    }

    pub fn entry(&self, i: usize, j: usize) -> Amplitude {
        self.diag[2 * i + j]
    }

    pub fn moduli(&self) -> [f64; 4] {
        self.diag.map(|d| d.norm())
    }

    pub fn scale(&self, c: Amplitude) -> Self {
        Self::new(self.diag.map(|d| d * c))
    }

    /// Diagonal of `K†K`.
    pub fn gram(&self) -> [f64; 4] {
        self.diag.map(|d| d.norm_sqr())
    }
}

impl Mul for DiagonalTwoQubitOperator {
    type Output = DiagonalTwoQubitOperator;

    fn mul(self, rhs: Self) -> Self {
        let mut out = self.diag;
        for (o, r) in out.iter_mut().zip(rhs.diag.iter()) {
            *o *= r;
        }
        Self::new(out)
    }
}

/// Coupling strength `α` of the `e^{-iα σz⊗σz}` interaction, `0 < α ≤ π/4`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub const MAX: f64 = FRAC_PI_4;

    pub fn new(alpha: f64) -> Result<Self> {
        // Accept a few ulps above π/4 so `k * PI / 4.0` style inputs pass.
        if !alpha.is_finite() || alpha <= 0.0 || alpha > Self::MAX * (1.0 + 1e-12) {
            return invalid(format!("coupling strength must lie in (0, π/4], got {alpha}"));
        }
        Ok(Self(alpha.min(Self::MAX)))
    }

    /// `fraction · π/4`.
    pub fn from_fraction_of_max(fraction: f64) -> Result<Self> {
        Self::new(fraction * Self::MAX)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn fraction_of_max(self) -> f64 {
        self.0 / Self::MAX
    }
}

pub fn is_unit(axis: &[f64; 3]) -> bool {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    (n - 1.0).abs() <= 1e-9
}

/// `exp(-i angle/2 · axis·σ)`.
pub fn rotation_gate(axis: [f64; 3], angle: f64) -> Result<SingleQubitOperator> {
    if !is_unit(&axis) {
        return invalid(format!("rotation axis {axis:?} is not a unit vector"));
    }
    if !angle.is_finite() {
        return invalid("rotation angle must be finite");
    }
    Ok(rotation_unchecked(axis, angle))
}

pub(crate) fn rotation_unchecked(axis: [f64; 3], angle: f64) -> SingleQubitOperator {
    let (s, c) = (angle / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    SingleQubitOperator::new([
        [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
        [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
    ])
}

/// The connection interaction `Δ_α = e^{-iα σz⊗σz}`.
pub fn interaction_gate(alpha: CouplingStrength) -> DiagonalTwoQubitOperator {
    let a = alpha.value();
    DiagonalTwoQubitOperator::from_phases([-a, a, a, -a])
}

/// Ancilla operator enacted by `Δ_α` when the register qubit is in `|bit⟩`.
fn conditional_ancilla_phase(delta: &DiagonalTwoQubitOperator, register_bit: usize) -> SingleQubitOperator {
    // Ordering |ancilla, register⟩.
    SingleQubitOperator::diagonal(delta.entry(0, register_bit), delta.entry(1, register_bit))
}

/// Pure state on the Bloch sphere at `(polar, azimuth)`.
pub fn bloch_state(polar: f64, azimuth: f64) -> QubitState {
    let (s, c) = (polar / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, azimuth)]
}

pub fn bloch_vector(v: &QubitState) -> [f64; 3] {
    let norm = v[0].norm_sqr() + v[1].norm_sqr();
    let cross = v[0].conj() * v[1];
    [2.0 * cross.re / norm, 2.0 * cross.im / norm, (v[0].norm_sqr() - v[1].norm_sqr()) / norm]
}

fn inner(a: &QubitState, b: &QubitState) -> Amplitude {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Final (pre-measurement) ancilla state for register basis pair `(i, j)`.
pub(crate) fn conditional_ancilla_states(alpha: CouplingStrength, config: &StepConfig) -> [QubitState; 4] {
    let delta = interaction_gate(alpha);
    let first = [conditional_ancilla_phase(&delta, 0), conditional_ancilla_phase(&delta, 1)];
    let mid = config.mid_operator();
    let x = SingleQubitOperator::pauli_x();
    let prep = config.prep_state();
    let mut out = [[ZERO; 2]; 4];
    for i in 0..2 {
        // The flip sandwiches the first interaction between X gates; the
        // leading X is folded into the preparation.
        let mut v = if config.flip { x.apply(&prep) } else { prep };
        v = first[i].apply(&v);
        if config.flip {
            v = x.apply(&v);
        }
        v = mid.apply(&v);
        for j in 0..2 {
            out[2 * i + j] = first[j].apply(&v);
        }
    }
    out
}

/// Kraus diagonals `(K₊, K₋)` for the two measurement outcomes of one step.
///
/// `K₊` projects the ancilla onto the measurement axis direction, `K₋` onto
/// its antipode.
pub fn step_kraus(alpha: CouplingStrength, config: &StepConfig) -> (DiagonalTwoQubitOperator, DiagonalTwoQubitOperator) {
    let states = conditional_ancilla_states(alpha, config);
    let (plus, minus) = config.measurement_states();
    let kp = states.map(|s| inner(&plus, &s));
    let km = states.map(|s| inner(&minus, &s));
    (DiagonalTwoQubitOperator::new(kp), DiagonalTwoQubitOperator::new(km))
}

/// Returns the common squared modulus if all four entries of `k` share
/// their modulus within `tol`, i.e. `k` is proportional to a unitary.
pub fn proportional_unitary_check(k: &DiagonalTwoQubitOperator, tol: f64) -> Option<f64> {
    let m = k.moduli();
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(0.0, f64::max);
    if hi - lo <= tol {
        let mean = m.iter().sum::<f64>() / 4.0;
        Some((mean * mean).min(1.0))
    } else {
        None
    }
}

/// Tolerance used when classifying a Kraus diagonal as proportional to a unitary.
pub const UNITARY_TOL: f64 = 1e-9;

/// `Φ = φ4 − φ3 − φ2 + φ1` wrapped to `(−π, π]`.
pub fn controlled_phase_angle(k: &DiagonalTwoQubitOperator) -> Result<f64> {
    let m = k.moduli();
    if proportional_unitary_check(k, UNITARY_TOL).is_none() {
        return invalid(format!("operator with moduli {m:?} is not proportional to a unitary"));
    }
    if m[0] < 1e-150 {
        return invalid("zero operator has no controlled-phase angle");
    }
    let d = k.diag();
    let z = d[3] * d[0] * d[1].conj() * d[2].conj();
    Ok(wrap_angle(z.arg()))
}

/// Single-qubit back-action of the maximal-coupling scheme: ancilla in
/// `|+⟩`, CZ with the register, `R_x(β)` on the ancilla, then a
/// computational-basis measurement with result `j`.
pub fn adqc_single_backaction(beta: f64, j: u8) -> SingleQubitOperator {
    let plus = bloch_state(std::f64::consts::FRAC_PI_2, 0.0);
    let rx = rotation_unchecked([1.0, 0.0, 0.0], beta);
    let z = SingleQubitOperator::pauli_z();
    let outcome = if j == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
    // CZ leaves the ancilla untouched for register |0⟩ and applies Z for |1⟩.
    let k0 = inner(&outcome, &rx.apply(&plus));
    let k1 = inner(&outcome, &rx.apply(&z.apply(&plus)));
    SingleQubitOperator::diagonal(k0, k1).scale(Complex64::new(SQRT_2, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepmodel::xbasis_config;
    use std::f64::consts::{FRAC_PI_2, PI};

    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    fn alpha(a: f64) -> CouplingStrength {
        CouplingStrength::new(a).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let id = rotation_gate(X, 0.0).unwrap();
        assert!(id.distance(&SingleQubitOperator::identity()) < 1e-15);

        let full = rotation_gate(Z, 2.0 * PI).unwrap();
        let minus_id = SingleQubitOperator::identity().scale(Complex64::new(-1.0, 0.0));
        assert!(full.distance(&minus_id) < 1e-12);

        let flip = rotation_gate(X, PI).unwrap();
        let expected = SingleQubitOperator::pauli_x().scale(Complex64::new(0.0, -1.0));
        assert!(flip.distance(&expected) < 1e-12);
    }

    #[test]
    fn rotation_rejects_non_unit_axis() {
        assert!(rotation_gate([1.0, 1.0, 0.0], 0.3).is_err());
        assert!(rotation_gate([0.0, 0.0, 0.0], 0.3).is_err());
    }

    #[test]
    fn coupling_range() {
        assert!(CouplingStrength::new(0.0).is_err());
        assert!(CouplingStrength::new(-0.1).is_err());
        assert!(CouplingStrength::new(0.8).is_err());
        assert!(CouplingStrength::new(f64::NAN).is_err());
        assert_eq!(CouplingStrength::new(PI / 4.0).unwrap().value(), PI / 4.0);
    }

    #[test]
    fn interaction_examples() {
        let d = interaction_gate(alpha(PI / 4.0));
        let args = d.diag().map(|z| z.arg());
        for (got, want) in args.iter().zip([-PI / 4.0, PI / 4.0, PI / 4.0, -PI / 4.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        // Locally equivalent to CZ.
        assert!((controlled_phase_angle(&d).unwrap() - PI).abs() < 1e-12);

        let small = interaction_gate(alpha(1e-12));
        assert!(small.diag().iter().all(|z| (z - ONE).norm() < 1e-11));

        let d = interaction_gate(alpha(PI / 16.0));
        assert!((d.diag()[0].arg() + PI / 16.0).abs() < 1e-15);
        assert!((d.diag()[1].arg() - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn xbasis_kraus_moduli() {
        let (kp, km) = step_kraus(alpha(PI / 4.0), &xbasis_config());
        for m in kp.moduli().iter().chain(km.moduli().iter()) {
            assert!((m - FRAC_1_SQRT_2).abs() < 1e-12);
        }

        let (kp, km) = step_kraus(alpha(PI / 16.0), &xbasis_config());
        let expected = (PI / 8.0).sin().powi(2) / 2.0;
        for g in km.gram() {
            assert!((g - expected).abs() < 1e-12);
        }
        for (a, b) in kp.gram().iter().zip(km.gram().iter()) {
            assert!((a + b - 1.0).abs() < 1e-12);
        }
        let p = proportional_unitary_check(&km, UNITARY_TOL).unwrap();
        assert!((p - 0.0732233).abs() < 1e-7);
    }

    #[test]
    fn proportional_check_examples() {
        let half = Complex64::new(0.5, 0.0);
        let k = DiagonalTwoQubitOperator::new([half, half * Complex64::i(), -half, half]);
        assert_eq!(proportional_unitary_check(&k, 1e-9), Some(0.25));

        let k = DiagonalTwoQubitOperator::new([Complex64::new(0.6, 0.0), half, half, half]);
        assert_eq!(proportional_unitary_check(&k, 1e-9), None);
    }

    #[test]
    fn controlled_phase_examples() {
        let cz = DiagonalTwoQubitOperator::from_phases([0.0, 0.0, 0.0, PI]);
        assert!((controlled_phase_angle(&cz).unwrap() - PI).abs() < 1e-12);
        assert_eq!(controlled_phase_angle(&DiagonalTwoQubitOperator::identity()).unwrap(), 0.0);
        let k = DiagonalTwoQubitOperator::from_phases([-PI / 4.0, PI / 4.0, -3.0 * PI / 4.0, 3.0 * PI / 4.0]);
        assert!((controlled_phase_angle(&k).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn controlled_phase_rejects_non_unitary() {
        let k = DiagonalTwoQubitOperator::new([Complex64::new(0.6, 0.0), ONE, ONE, ONE]);
        assert!(controlled_phase_angle(&k).is_err());
        let zero = DiagonalTwoQubitOperator::new([ZERO; 4]);
        assert!(controlled_phase_angle(&zero).is_err());
    }

    #[test]
    fn backaction_examples() {
        assert!(adqc_single_backaction(0.0, 0).distance(&SingleQubitOperator::identity()) < 1e-12);
        assert!(adqc_single_backaction(0.0, 1).distance(&SingleQubitOperator::pauli_z()) < 1e-12);
        let rz = rotation_gate(Z, FRAC_PI_2).unwrap();
        assert!(adqc_single_backaction(FRAC_PI_2, 0).distance(&rz) < 1e-12);
        for beta in [0.3, -1.2, 2.9] {
            let expected = SingleQubitOperator::pauli_z() * rotation_gate(Z, beta).unwrap();
            assert!(adqc_single_backaction(beta, 1).distance(&expected) < 1e-12);
        }
    }

    #[test]
    fn axis_angle_roundtrip() {
        let axis = [0.48, -0.6, 0.64];
        let u = rotation_gate(axis, 2.2).unwrap();
        let (n, a) = u.su2_axis_angle();
        assert!(rotation_gate(n, a).unwrap().distance(&u) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unit_axis() -> impl Strategy<Value = [f64; 3]> {
            (0.0..PI, -PI..PI).prop_map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn rotations_are_unitary(axis in unit_axis(), angle in -10.0..10.0f64) {
                prop_assert!(rotation_gate(axis, angle).unwrap().is_unitary(1e-12));
            }

            #[test]
            fn phase_gauge_invariance(
                phases in proptest::array::uniform4(-PI..PI),
                global in -PI..PI, a in -PI..PI, b in -PI..PI,
            ) {
                let k = DiagonalTwoQubitOperator::from_phases(phases);
                let base = controlled_phase_angle(&k).unwrap();
                let gauge = DiagonalTwoQubitOperator::from_phases([global, global + a, global + b, global + a + b]);
                let moved = controlled_phase_angle(&(gauge * k)).unwrap();
                prop_assert!(wrap_angle(moved - base).abs() < 1e-12);
            }
        }
    }
}
