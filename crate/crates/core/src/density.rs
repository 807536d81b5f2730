//! Four-level density matrices over the ordered basis (|0⟩, |1⟩, |aux⟩, |e⟩).

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ion levels, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Zero,
    One,
    Aux,
    Excited,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Zero, Level::One, Level::Aux, Level::Excited];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One => 1,
            Level::Aux => 2,
            Level::Excited => 3,
        }
    }
}

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// A 4×4 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4<Complex64>);

impl DensityMatrix {
    /// Validates `m` against the density matrix invariants.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps a matrix produced by a trusted propagation step.
    pub(crate) fn from_raw(m: Matrix4<Complex64>) -> Self {
        DensityMatrix(m)
    }

    /// |ψ⟩⟨ψ| for a (normalized) state vector.
    pub fn pure(psi: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("state vector norm² is {norm}, expected 1")));
        }
        let m = Matrix4::from_fn(|i, j| psi[i] * psi[j].conj());
        Ok(DensityMatrix(m))
    }

    /// Embeds a qubit pure state a|0⟩ + b|1⟩.
    pub fn from_qubit(a: Complex64, b: Complex64) -> Result<Self> {
        let z = Complex64::new(0.0, 0.0);
        Self::pure([a, b, z, z])
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<Complex64> {
        self.0
    }

    #[inline]
    pub fn element(&self, row: Level, col: Level) -> Complex64 {
        self.0[(row.index(), col.index())]
    }

    #[inline]
    pub fn population(&self, level: Level) -> f64 {
        self.element(level, level).re
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// The (unnormalized) |0⟩,|1⟩ block.
    pub fn qubit_block(&self) -> Matrix2<Complex64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Symmetrize first so the eigensolver sees an exactly Hermitian input.
        let h = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("hermiticity error {herm:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let lo = self.min_eigenvalue();
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// Half the trace norm of `self − other`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = self.0 - other.0;
        let d = (d + d.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * SymmetricEigen::new(d).eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Pure |0⟩⟨0|, the state every freshly prepared ion starts in.
pub fn initial_state() -> DensityMatrix {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    DensityMatrix(m)
}
