//! Three-projection state tomography with linear reconstruction.
//!
//! Every axis is read out the same way: the prepared ensemble is sent
//! through the compiled rotation that maps that axis onto z, and the
//! normalized qubit population difference is recorded.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compiler::{compile_rotation, ideal_output, projection_rotation, Axis, RotationSpec};
use crate::density::{initial_state, DensityMatrix, Level};
use crate::dynamics::{free_evolve, Dissipator, EvolutionSettings, Propagator};
use crate::error::{Error, Result};
use crate::model::{sample_ensemble, DecoherenceSpec, EnsembleSpec, IonParams, LevelScheme};
use crate::pulse::SechypShape;
use crate::qubit::{self, QubitOperator, QubitState};

/// Largest expectation magnitude accepted as plausible measurement data.
pub const EXPECTATION_BOUND: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliExpectations {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PauliExpectations {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y), ("z", z)] {
            if !v.is_finite() || v.abs() > EXPECTATION_BOUND {
                return Err(Error::Domain(format!(
                    "expectation {name} = {v} outside ±{EXPECTATION_BOUND}"
                )));
            }
        }
        Ok(PauliExpectations { x, y, z })
    }

    /// Exact expectations of a qubit density matrix.
    pub fn of(rho: &QubitOperator) -> Self {
        let b = qubit::bloch_vector(rho);
        PauliExpectations {
            x: b[0],
            y: b[1],
            z: b[2],
        }
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }
}

/// ρ = (I + xX + yY + zZ)/2, with tr ρ fixed to one.
pub fn reconstruct(e: &PauliExpectations) -> QubitOperator {
    let half = Complex64::new(0.5, 0.0);
    (Matrix2::identity()
        + qubit::pauli_x() * Complex64::new(e.x, 0.0)
        + qubit::pauli_y() * Complex64::new(e.y, 0.0)
        + qubit::pauli_z() * Complex64::new(e.z, 0.0))
        * half
}

/// Re⟨ψ|ρ|ψ⟩. Not clamped: an unphysical ρ can score above one.
pub fn fidelity(psi: &QubitState, rho: &QubitOperator) -> Result<f64> {
    let n = psi.norm_squared();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("state norm² is {n}, expected 1")));
    }
    Ok(qubit::overlap(psi, rho))
}

/// Single-rotation fidelity from a rotation-plus-tomography fidelity.
pub fn qr_fidelity(f_qr_qst: f64) -> Result<f64> {
    if !(f_qr_qst >= 0.0) {
        return Err(Error::Domain(format!("fidelity must be ≥ 0, got {f_qr_qst}")));
    }
    Ok(f_qr_qst.sqrt())
}

/// Ensemble mean of (P₀ − P₁)/(P₀ + P₁).
pub fn measure_z(final_states: &[DensityMatrix]) -> Result<f64> {
    if final_states.is_empty() {
        return Err(Error::Domain("no ions to read out".into()));
    }
    let mut sum = 0.0;
    for (ion, rho) in final_states.iter().enumerate() {
        let p0 = rho.population(Level::Zero);
        let p1 = rho.population(Level::One);
        let total = p0 + p1;
        if !(total > 1e-15) {
            return Err(Error::DegenerateReadout { ion });
        }
        sum += (p0 - p1) / total;
    }
    Ok(sum / final_states.len() as f64)
}

/// Ensemble-mean population of each level, in basis order.
pub fn mean_populations(states: &[DensityMatrix]) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for rho in states {
        for l in Level::ALL {
            acc[l.index()] += rho.population(l);
        }
    }
    let n = states.len().max(1) as f64;
    acc.map(|v| v / n)
}

/// Everything a simulated experiment depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub ensemble: EnsembleSpec,
    pub scheme: LevelScheme,
    pub decoherence: DecoherenceSpec,
    pub evolution: EvolutionSettings,
    pub shape: SechypShape,
    /// Pause between consecutive pulses, and between consecutive gates (s).
    pub gap: f64,
}

impl Default for World {
    fn default() -> Self {
        World {
            ensemble: EnsembleSpec::default(),
            scheme: LevelScheme::default(),
            decoherence: DecoherenceSpec::default(),
            evolution: EvolutionSettings::default(),
            shape: SechypShape::default(),
            gap: 0.0,
        }
    }
}

impl World {
    /// No decoherence and `n_ions` identical resonant ions.
    pub fn ideal(n_ions: usize) -> Self {
        World {
            ensemble: EnsembleSpec::homogeneous(n_ions),
            decoherence: DecoherenceSpec::none(),
            ..World::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        self.scheme.validate()?;
        self.decoherence.validate()?;
        self.evolution.validate()?;
        self.shape.validate()?;
        if !(self.gap >= 0.0) {
            return Err(Error::config("gap", "must be ≥ 0"));
        }
        Ok(())
    }

    pub fn dissipator(&self) -> Dissipator {
        Dissipator::new(&self.decoherence)
    }

    /// Prepared propagator for the compiled gate of `spec`.
    pub fn gate_propagator(&self, spec: RotationSpec) -> Result<Propagator> {
        let gate = compile_rotation(spec, &self.shape, self.gap)?;
        Propagator::new(&gate.sequence, &self.scheme, &self.evolution)
    }

    /// Applies the gate of `spec` to every ion, returning final states and
    /// per-ion excited dwell times.
    pub fn apply_gate(
        &self,
        spec: RotationSpec,
        states: &[DensityMatrix],
        ions: &[IonParams],
    ) -> Result<(Vec<DensityMatrix>, Vec<f64>)> {
        let prop = self.gate_propagator(spec)?;
        let out = prop.evolve_ensemble_with_dwell(states, ions, &self.dissipator())?;
        Ok(out.into_iter().unzip())
    }

    /// Free evolution for the inter-gate pause.
    fn pause(&self, states: Vec<DensityMatrix>, ions: &[IonParams]) -> Result<Vec<DensityMatrix>> {
        if self.gap == 0.0 {
            return Ok(states);
        }
        states
            .iter()
            .zip(ions)
            .map(|(rho, ion)| free_evolve(rho, self.gap, ion, &self.decoherence))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReadout {
    pub axis: Axis,
    pub expectation: f64,
    /// Ensemble-mean populations of (|0⟩, |1⟩, |aux⟩, |e⟩) at readout.
    pub populations: [f64; 4],
    /// Mean excited dwell of the projection gate (s).
    pub projection_dwell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub prep: RotationSpec,
    pub expectations: PauliExpectations,
    #[serde(with = "crate::serde_complex::matrix2")]
    pub rho: QubitOperator,
    pub fidelity_qr_qst: f64,
    pub fidelity_qr: f64,
    #[serde(with = "crate::serde_complex::vector2")]
    pub target_state: QubitState,
    pub seed: u64,
    pub readouts: Vec<AxisReadout>,
    /// Mean excited dwell of the preparation gate (s).
    pub prep_dwell: f64,
    /// Mean excited dwell over preparation plus one projection (s).
    pub excited_dwell_qr_qst: f64,
}

/// Prepares `prep` from |0⟩ and reads out x, y and z.
///
/// Each axis is its own repetition of the experiment on a freshly prepared
/// ensemble. The ensemble is drawn from the same seed each time, so the
/// preparation stage is identical across axes and is simulated once.
pub fn run_tomography(prep: RotationSpec, world: &World) -> Result<TomographyRecord> {
    world.validate()?;
    let ions = sample_ensemble(&world.ensemble)?;
    let fresh = vec![initial_state(); ions.len()];
    let (prepared, prep_dwells) = world.apply_gate(prep, &fresh, &ions)?;
    let prepared = world.pause(prepared, &ions)?;
    let prep_dwell = mean(&prep_dwells);

    let mut readouts = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let (finals, dwells) = world.apply_gate(projection_rotation(axis), &prepared, &ions)?;
        readouts.push(AxisReadout {
            axis,
            expectation: measure_z(&finals)?,
            populations: mean_populations(&finals),
            projection_dwell: mean(&dwells),
        });
    }
    let expectations = PauliExpectations::new(
        readouts[0].expectation,
        readouts[1].expectation,
        readouts[2].expectation,
    )?;
    let rho = reconstruct(&expectations);
    let target_state = ideal_output(prep);
    let fidelity_qr_qst = fidelity(&target_state, &rho)?;
    let fidelity_qr = qr_fidelity(fidelity_qr_qst)?;
    let projection_dwell = readouts.iter().map(|r| r.projection_dwell).sum::<f64>() / 3.0;
    Ok(TomographyRecord {
        prep,
        expectations,
        rho,
        fidelity_qr_qst,
        fidelity_qr,
        target_state,
        seed: world.ensemble.rng_seed,
        readouts,
        prep_dwell,
        excited_dwell_qr_qst: prep_dwell + projection_dwell,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{rotation_for_target, TargetState};
    use crate::qubit::{ket0, projector};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn reconstruct_examples() {
        let r = reconstruct(&PauliExpectations::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(r, Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.0)));
        let r = reconstruct(&PauliExpectations::new(-1.0, 0.0, 0.0).unwrap());
        assert_eq!(r, Matrix2::new(c(0.5), c(-0.5), c(-0.5), c(0.5)));
        let r = reconstruct(&PauliExpectations::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(r, Matrix2::identity() * c(0.5));
    }

    #[test]
    fn fidelity_examples() {
        let z = |v| reconstruct(&PauliExpectations::new(0.0, 0.0, v).unwrap());
        assert_relative_eq!(fidelity(&ket0(), &z(1.0)).unwrap(), 1.0);
        assert_relative_eq!(fidelity(&ket0(), &z(1.04)).unwrap(), 1.02, epsilon = 1e-12);
        assert_relative_eq!(fidelity(&ket0(), &(Matrix2::identity() * c(0.5))).unwrap(), 0.5);
        let bad = QubitState::new(c(1.0), c(1.0));
        assert!(matches!(fidelity(&bad, &z(1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn qr_fidelity_examples() {
        assert_relative_eq!(qr_fidelity(0.92).unwrap(), 0.959, epsilon = 5e-4);
        assert_relative_eq!(qr_fidelity(0.87).unwrap(), 0.933, epsilon = 5e-4);
        assert_eq!(qr_fidelity(1.0).unwrap(), 1.0);
        assert!(matches!(qr_fidelity(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn expectation_bounds() {
        assert!(PauliExpectations::new(0.0, 1.3, 0.0).is_err());
        assert!(PauliExpectations::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(PauliExpectations::new(1.2, -1.2, 0.0).is_ok());
    }

    #[test]
    fn measure_z_examples() {
        let zero = initial_state();
        assert_eq!(measure_z(&[zero, zero]).unwrap(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_qubit(c(h), c(h)).unwrap();
        assert!(measure_z(&[plus; 3]).unwrap().abs() < 1e-15);
        assert!(measure_z(&[]).is_err());

        // Renormalization hides leakage out of the qubit subspace.
        let mut m = zero.into_matrix();
        m[(0, 0)] = c(0.6);
        m[(3, 3)] = c(0.4);
        let leaky = DensityMatrix::new(m).unwrap();
        assert_relative_eq!(measure_z(&[leaky]).unwrap(), 1.0);

        let mut m = zero.into_matrix();
        m[(0, 0)] = c(0.0);
        m[(2, 2)] = c(1.0);
        let lost = DensityMatrix::new(m).unwrap();
        assert_eq!(measure_z(&[zero, lost]), Err(Error::DegenerateReadout { ion: 1 }));
    }

    #[test]
    fn ideal_world_tomography_of_ground_state() {
        let rec = run_tomography(RotationSpec::IDENTITY, &World::ideal(1)).unwrap();
        assert!((rec.fidelity_qr_qst - 1.0).abs() < 0.01, "{rec:?}");
        assert_relative_eq!(rec.fidelity_qr, rec.fidelity_qr_qst.sqrt());
    }

    #[test]
    fn ideal_world_tomography_of_minus_state() {
        let rec = run_tomography(rotation_for_target(TargetState::Minus), &World::ideal(1)).unwrap();
        assert!(rec.fidelity_qr_qst >= 0.999, "{rec:?}");
        assert!((rec.expectations.x + 1.0).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn round_trip(theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU, r in 0.0..=1.0f64) {
            let x = r * theta.sin() * phi.cos();
            let y = r * theta.sin() * phi.sin();
            let z = r * theta.cos();
            let rho = reconstruct(&PauliExpectations::new(x, y, z).unwrap());
            let back = reconstruct(&PauliExpectations::of(&rho));
            prop_assert!((back - rho).iter().all(|e| e.norm() <= 1e-12));
            prop_assert!((rho.trace() - c(1.0)).norm() < 1e-15);
            prop_assert!((rho - rho.adjoint()).norm() < 1e-15);
        }

        #[test]
        fn affine(a in -1.0..1.0f64, b in -1.0..1.0f64, s in 0.0..1.0f64) {
            let p = PauliExpectations::new(a, b, a * b).unwrap();
            let q = PauliExpectations::new(b, -a, s).unwrap();
            let mix = PauliExpectations::new(
                s * p.x + (1.0 - s) * q.x,
                s * p.y + (1.0 - s) * q.y,
                s * p.z + (1.0 - s) * q.z,
            ).unwrap();
            let lhs = reconstruct(&mix);
            let rhs = reconstruct(&p) * c(s) + reconstruct(&q) * c(1.0 - s);
            prop_assert!((lhs - rhs).norm() < 1e-14);
        }

        #[test]
        fn physical_fidelity_bounds(theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU, r in 0.0..=1.0f64,
                                    a in 0.0..std::f64::consts::PI, b in 0.0..std::f64::consts::TAU) {
            let rho = reconstruct(&PauliExpectations::new(
                r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()).unwrap());
            let psi = QubitState::new(c((a / 2.0).cos()), Complex64::from_polar((a / 2.0).sin(), b));
            let f = fidelity(&psi, &rho).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            prop_assert!((fidelity(&psi, &projector(&psi)).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
