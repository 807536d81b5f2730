//! Two-level helpers on the |0⟩,|1⟩ subspace.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

pub type QubitState = Vector2<Complex64>;
pub type QubitOperator = Matrix2<Complex64>;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> QubitOperator {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// Y = −i|0⟩⟨1| + i|1⟩⟨0|.
pub fn pauli_y() -> QubitOperator {
    Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn pauli_z() -> QubitOperator {
    Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

pub fn ket0() -> QubitState {
    Vector2::new(c(1.0, 0.0), c(0.0, 0.0))
}

pub fn ket1() -> QubitState {
    Vector2::new(c(0.0, 0.0), c(1.0, 0.0))
}

pub fn projector(psi: &QubitState) -> QubitOperator {
    psi * psi.adjoint()
}

/// (tr(Xρ), tr(Yρ), tr(Zρ)).
pub fn bloch_vector(rho: &QubitOperator) -> Vector3<f64> {
    Vector3::new(
        (pauli_x() * rho).trace().re,
        (pauli_y() * rho).trace().re,
        (pauli_z() * rho).trace().re,
    )
}

/// Re⟨ψ|ρ|ψ⟩ without normalization checks.
pub(crate) fn overlap(psi: &QubitState, rho: &QubitOperator) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}

/// |⟨a|b⟩|² for normalized kets.
pub fn state_overlap(a: &QubitState, b: &QubitState) -> f64 {
    a.dotc(b).norm_sqr()
}
