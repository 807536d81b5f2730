//! Compilation of equatorial-axis qubit rotations into four two-color pulses.
//!
//! A rotation (θ, φ) is realized in the bright/dark basis of relative phase
//! φ: the bright state is lifted to |e⟩ and returned along a path rotated by
//! θ, then the dark state (relative phase φ + π) is lifted and returned along
//! the same path so that it picks up the same optical phase as the bright
//! state did.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{make_two_color, PulseSequence, SechypShape};
use crate::qubit::{ket0, QubitOperator, QubitState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    /// Path separation angle, in [0, 2π).
    pub theta: f64,
    /// Relative phase of the two colors, in [0, 2π).
    pub phi: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs.
    if TAU - w < 1e-12 {
        0.0
    } else {
        w
    }
}

impl RotationSpec {
    /// Wraps both angles into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain(format!("non-finite rotation angles ({theta}, {phi})")));
        }
        Ok(RotationSpec {
            theta: wrap_angle(theta),
            phi: wrap_angle(phi),
        })
    }

    pub const IDENTITY: RotationSpec = RotationSpec { theta: 0.0, phi: 0.0 };
}

/// The six cardinal states used in preparation and tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl TargetState {
    pub const ALL: [TargetState; 6] = [
        TargetState::Zero,
        TargetState::One,
        TargetState::Plus,
        TargetState::Minus,
        TargetState::PlusI,
        TargetState::MinusI,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TargetState::Zero => "|0>",
            TargetState::One => "|1>",
            TargetState::Plus => "|0>+|1>",
            TargetState::Minus => "|0>-|1>",
            TargetState::PlusI => "|0>+i|1>",
            TargetState::MinusI => "|0>-i|1>",
        }
    }

    /// Short name used in configuration files.
    pub fn key(self) -> &'static str {
        match self {
            TargetState::Zero => "0",
            TargetState::One => "1",
            TargetState::Plus => "+",
            TargetState::Minus => "-",
            TargetState::PlusI => "+i",
            TargetState::MinusI => "-i",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        TargetState::ALL
            .into_iter()
            .find(|c| c.key() == t || c.label() == t)
            .ok_or_else(|| Error::Domain(format!("unknown target state `{s}`")))
    }

    pub fn is_superposition(self) -> bool {
        !matches!(self, TargetState::Zero | TargetState::One)
    }

    pub fn vector(self) -> QubitState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            TargetState::Zero => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            TargetState::One => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            TargetState::Plus => (Complex64::new(s, 0.0), Complex64::new(s, 0.0)),
            TargetState::Minus => (Complex64::new(s, 0.0), Complex64::new(-s, 0.0)),
            TargetState::PlusI => (Complex64::new(s, 0.0), Complex64::new(0.0, s)),
            TargetState::MinusI => (Complex64::new(s, 0.0), Complex64::new(0.0, -s)),
        };
        QubitState::new(a, b)
    }
}

/// e^{iθ/2}·[[cos θ/2, i e^{iφ} sin θ/2], [i e^{−iφ} sin θ/2, cos θ/2]].
pub fn target_unitary(spec: RotationSpec) -> QubitOperator {
    let half = 0.5 * spec.theta;
    let (s, c) = half.sin_cos();
    let global = Complex64::from_polar(1.0, half);
    let i = Complex64::new(0.0, 1.0);
    let diag = Complex64::new(c, 0.0);
    let upper = i * Complex64::from_polar(s, spec.phi);
    let lower = i * Complex64::from_polar(s, -spec.phi);
    QubitOperator::new(diag, upper, lower, diag) * global
}

/// Rotation taking |0⟩ to `target` up to global phase.
pub fn rotation_for_state(target: &QubitState) -> Result<RotationSpec> {
    let norm = target.norm_squared();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("target state norm² is {norm}, expected 1")));
    }
    let (a, b) = (target[0], target[1]);
    let theta = 2.0 * a.norm().clamp(0.0, 1.0).acos();
    // Remove the global phase so the |0⟩ amplitude is real and non-negative.
    let b = if a.norm() > 1e-12 { b * (a.conj() / a.norm()) } else { b };
    let phi = if b.norm() < 1e-12 || a.norm() < 1e-12 {
        // Pole targets: φ is immaterial, canonically 0.
        0.0
    } else {
        FRAC_PI_2 - b.arg()
    };
    RotationSpec::new(theta, phi)
}

pub fn rotation_for_target(target: TargetState) -> RotationSpec {
    rotation_for_state(&target.vector()).expect("cardinal states are normalized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Rotation that maps the given Bloch axis onto +z.
pub fn projection_rotation(axis: Axis) -> RotationSpec {
    match axis {
        Axis::X => rotation_for_target(TargetState::Minus),
        Axis::Y => rotation_for_target(TargetState::MinusI),
        Axis::Z => RotationSpec::IDENTITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledGate {
    pub sequence: PulseSequence,
    pub target: RotationSpec,
}

/// Four contiguous two-color pulses with (φ, ψ) = (φ, 0), (φ, θ),
/// (φ + π, 0), (φ + π, 0), separated by `gap`.
pub fn compile_rotation(spec: RotationSpec, shape: &SechypShape, gap: f64) -> Result<CompiledGate> {
    shape.validate()?;
    let dark_phi = wrap_angle(spec.phi + PI);
    let pulses = [
        make_two_color(*shape, spec.phi, 0.0, 0.0),
        make_two_color(*shape, spec.phi, spec.theta, 0.0),
        make_two_color(*shape, dark_phi, 0.0, 0.0),
        make_two_color(*shape, dark_phi, 0.0, 0.0),
    ];
    Ok(CompiledGate {
        sequence: PulseSequence::contiguous(pulses, gap)?,
        target: spec,
    })
}

/// target_unitary(spec)|0⟩.
pub fn ideal_output(spec: RotationSpec) -> QubitState {
    target_unitary(spec) * ket0()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{bloch_vector, projector, state_overlap};
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Vector3};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_at_zero_theta() {
        for phi in [0.0, 1.0, 4.0] {
            let u = target_unitary(RotationSpec { theta: 0.0, phi });
            assert_eq!(u, Matrix2::identity());
        }
    }

    #[test]
    fn pi_rotation_about_phi_zero() {
        let u = target_unitary(RotationSpec { theta: PI, phi: 0.0 });
        let expected = Matrix2::new(c(0.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0));
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn half_pi_rotation_at_phi_half_pi() {
        let u = target_unitary(RotationSpec {
            theta: PI / 2.0,
            phi: PI / 2.0,
        });
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Matrix2::new(c(h, 0.0), c(-h, 0.0), c(h, 0.0), c(h, 0.0)) * Complex64::from_polar(1.0, PI / 4.0);
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn five_state_angles() {
        let cases = [
            (TargetState::One, PI, 0.0),
            (TargetState::Plus, PI / 2.0, PI / 2.0),
            (TargetState::Minus, PI / 2.0, 3.0 * PI / 2.0),
            (TargetState::PlusI, PI / 2.0, 0.0),
            (TargetState::MinusI, PI / 2.0, PI),
            (TargetState::Zero, 0.0, 0.0),
        ];
        for (t, theta, phi) in cases {
            let r = rotation_for_target(t);
            assert_relative_eq!(r.theta, theta, epsilon = 1e-12);
            assert_relative_eq!(r.phi, phi, epsilon = 1e-12);
            let out = ideal_output(r);
            assert_relative_eq!(state_overlap(&out, &t.vector()), 1.0, epsilon = 1e-12);
        }
        // The |0⟩−|1⟩ lower-left element.
        let u = target_unitary(rotation_for_target(TargetState::Minus));
        let lower = u[(1, 0)] / Complex64::from_polar(1.0, PI / 4.0);
        assert!((lower - c(-std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_target() {
        let v = QubitState::new(c(1.0, 0.0), c(1.0, 0.0));
        assert!(matches!(rotation_for_state(&v), Err(Error::Domain(_))));
    }

    #[test]
    fn projections() {
        assert_eq!(projection_rotation(Axis::Z), RotationSpec::IDENTITY);
        let x = projection_rotation(Axis::X);
        assert_relative_eq!(x.theta, PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(x.phi, 3.0 * PI / 2.0, epsilon = 1e-12);
        let y = projection_rotation(Axis::Y);
        assert_relative_eq!(y.phi, PI, epsilon = 1e-12);
        // Each projection maps its axis onto +z.
        for (axis, state) in [(Axis::X, TargetState::Plus), (Axis::Y, TargetState::PlusI)] {
            let u = target_unitary(projection_rotation(axis));
            let out = u * state.vector();
            assert_relative_eq!(bloch_vector(&projector(&out))[2], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn compiled_layout() {
        let shape = SechypShape::default();
        let spec = RotationSpec::new(1.1, 0.4).unwrap();
        let gate = compile_rotation(spec, &shape, 0.0).unwrap();
        let p = gate.sequence.pulses();
        assert_eq!(p.len(), 4);
        assert_relative_eq!(gate.sequence.total_duration(), 17.6e-6, max_relative = 1e-12);
        assert_eq!([p[0].psi, p[1].psi, p[2].psi, p[3].psi], [0.0, 1.1, 0.0, 0.0]);
        assert_eq!(p[0].phi, 0.4);
        assert_eq!(p[1].phi, 0.4);
        assert_relative_eq!(p[2].phi, 0.4 + PI, epsilon = 1e-12);
        assert_eq!(p[2].phi, p[3].phi);

        let two = gate.sequence.then(&gate.sequence, 0.0).unwrap();
        assert_relative_eq!(two.total_duration(), 35.2e-6, max_relative = 1e-12);

        let gapped = compile_rotation(spec, &shape, 1e-6).unwrap();
        assert_relative_eq!(gapped.sequence.total_duration(), 20.6e-6, max_relative = 1e-12);

        let id = compile_rotation(RotationSpec::new(0.0, 2.0).unwrap(), &shape, 0.0).unwrap();
        assert!(id.sequence.pulses().iter().all(|p| p.psi == 0.0));
    }

    proptest! {
        #[test]
        fn unitary(theta in 0.0..TAU, phi in 0.0..TAU) {
            let u = target_unitary(RotationSpec { theta, phi });
            let e = u * u.adjoint() - Matrix2::identity();
            prop_assert!(e.norm() < 1e-12);
        }

        // U(θ, φ) rotates Bloch vectors by −θ about n = (cos φ, −sin φ, 0).
        #[test]
        fn equatorial_rotation(theta in 0.0..TAU, phi in 0.0..TAU, a in 0.0..PI, b in 0.0..TAU) {
            let u = target_unitary(RotationSpec { theta, phi });
            let psi = QubitState::new(c((a / 2.0).cos(), 0.0), Complex64::from_polar((a / 2.0).sin(), b));
            let before = bloch_vector(&projector(&psi));
            let after = bloch_vector(&projector(&(u * psi)));
            let n = Vector3::new(phi.cos(), -phi.sin(), 0.0);
            let ang = -theta;
            let rotated = before * ang.cos() + n.cross(&before) * ang.sin() + n * n.dot(&before) * (1.0 - ang.cos());
            prop_assert!((after - rotated).norm() < 1e-12);
        }

        #[test]
        fn state_round_trip(a in 0.0..PI, b in 0.0..TAU) {
            let psi = QubitState::new(c((a / 2.0).cos(), 0.0), Complex64::from_polar((a / 2.0).sin(), b));
            let spec = rotation_for_state(&psi).unwrap();
            prop_assert!(spec.theta >= 0.0 && spec.theta < TAU);
            prop_assert!(spec.phi >= 0.0 && spec.phi < TAU);
            prop_assert!((state_overlap(&ideal_output(spec), &psi) - 1.0).abs() < 1e-10);
        }
    }
}
