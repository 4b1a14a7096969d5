//! Independent three-qubit statevector simulator used as a test oracle.
//!
//! Qubit order is `|a r1 r2⟩` with the ancilla most significant. Nothing
//! here calls into the library's quantum code.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type State = [C; 8];
pub type Mat2 = [[C; 2]; 2];

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rot(axis: [f64; 3], angle: f64) -> Mat2 {
    let (s, co) = (angle / 2.0).sin_cos();
    let [x, y, z] = axis;
    // cos(θ/2)·I − i·sin(θ/2)·(xX + yY + zZ)
    [[c(co, -s * z), c(-s * y, -s * x)], [c(s * y, -s * x), c(co, s * z)]]
}

pub fn pauli_x() -> Mat2 {
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn bloch(polar: f64, azimuth: f64) -> [C; 2] {
    [c((polar / 2.0).cos(), 0.0), C::from_polar((polar / 2.0).sin(), azimuth)]
}

pub fn on_ancilla(m: &Mat2, psi: &State) -> State {
    let mut out = [c(0.0, 0.0); 8];
    for r in 0..4 {
        for a in 0..2 {
            for b in 0..2 {
                out[4 * a + r] += m[a][b] * psi[4 * b + r];
            }
        }
    }
    out
}

/// `exp(−iα Z_a Z_r)` with `which` selecting register qubit 1 or 2.
pub fn couple(alpha: f64, which: usize, psi: &State) -> State {
    let mut out = *psi;
    for (idx, amp) in out.iter_mut().enumerate() {
        let a = (idx >> 2) & 1;
        let r = if which == 1 { (idx >> 1) & 1 } else { idx & 1 };
        let zz = if a == r { 1.0 } else { -1.0 };
        *amp *= C::from_polar(1.0, -alpha * zz);
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub prep: (f64, f64),
    pub mid_axis: [f64; 3],
    pub mid_angle: f64,
    pub flip: bool,
    pub meas: (f64, f64),
}

impl Settings {
    pub fn of(cfg: &czwalk::StepConfig) -> Self {
        Self {
            prep: (cfg.prep_polar, cfg.prep_azimuth),
            mid_axis: cfg.mid_rotation.axis,
            mid_angle: cfg.mid_rotation.angle,
            flip: cfg.flip,
            meas: (cfg.meas_polar, cfg.meas_azimuth),
        }
    }
}

/// Runs one mediated step on register state `reg` (4 amplitudes) and
/// returns the unnormalized register states for the outcomes along and
/// against the measurement axis.
pub fn step(alpha: f64, s: &Settings, reg: &[C; 4]) -> ([C; 4], [C; 4]) {
    let prep = bloch(s.prep.0, s.prep.1);
    let mut psi = [c(0.0, 0.0); 8];
    for a in 0..2 {
        for r in 0..4 {
            psi[4 * a + r] = prep[a] * reg[r];
        }
    }
    if s.flip {
        psi = on_ancilla(&pauli_x(), &psi);
    }
    psi = couple(alpha, 1, &psi);
    if s.flip {
        psi = on_ancilla(&pauli_x(), &psi);
    }
    psi = on_ancilla(&rot(s.mid_axis, s.mid_angle), &psi);
    psi = couple(alpha, 2, &psi);
    let plus = bloch(s.meas.0, s.meas.1);
    let minus = bloch(PI - s.meas.0, s.meas.1 + PI);
    let project = |m: [C; 2]| {
        let mut out = [c(0.0, 0.0); 4];
        for r in 0..4 {
            out[r] = m[0].conj() * psi[r] + m[1].conj() * psi[4 + r];
        }
        out
    };
    (project(plus), project(minus))
}

pub fn norm2(v: &[C; 4]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn plus_plus() -> [C; 4] {
    [c(0.5, 0.0); 4]
}

pub fn wrap(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Distance on the circle.
pub fn circ(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

pub fn invariant(v: &[C; 4]) -> f64 {
    (v[3] * v[0] * v[1].conj() * v[2].conj()).arg()
}

/// Oracle characterization of one step on `|++⟩`.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub unitary: bool,
    pub phi: [f64; 2],
    pub p: [f64; 2],
}

pub fn characterize(alpha: f64, s: &Settings) -> Oracle {
    let (kp, km) = step(alpha, s, &plus_plus());
    let mut unitary = true;
    let mut phi = [0.0; 2];
    let mut p = [0.0; 2];
    for (o, k) in [kp, km].iter().enumerate() {
        // Diagonal Kraus entries are 2·amplitude for a |++⟩ input.
        let mods: Vec<f64> = k.iter().map(|z| (2.0 * z).norm_sqr()).collect();
        let m = mods.iter().sum::<f64>() / 4.0;
        if mods.iter().any(|x| (x - m).abs() > 1e-9) {
            unitary = false;
        }
        p[o] = norm2(k);
        phi[o] = if p[o] < 1e-300 { 0.0 } else { invariant(k) };
    }
    Oracle { unitary, phi, p }
}

/// Raw outcome index (0 along the measurement axis, 1 against it) that
/// realizes port 1: the larger |Φ|, or the outcome against the axis on a tie.
pub fn port_one_index(o: &Oracle) -> usize {
    let mag = |x: f64| if PI - wrap(x).abs() < 1e-12 { PI } else { wrap(x).abs() };
    if mag(o.phi[1]) >= mag(o.phi[0]) - 1e-12 {
        1
    } else {
        0
    }
}

/// `((Φ₀, p₀), (Φ₁, p₁))` by port.
pub fn port_split(o: &Oracle) -> ((f64, f64), (f64, f64)) {
    let one = port_one_index(o);
    ((o.phi[1 - one], o.p[1 - one]), (o.phi[one], o.p[one]))
}
