//! Pulse-level simulation of an ensemble qubit in a rare-earth-doped crystal.
//!
//! Arbitrary rotations about equatorial axes are compiled into sequences of
//! two-color sechyp pulses acting on bright and dark superpositions of the
//! two hyperfine qubit levels. Each ion of an inhomogeneous ensemble is
//! evolved under a four-level Lindblad model, and the ensemble is
//! characterized by three-axis state tomography.

pub mod compiler;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod pulse;
pub mod qubit;
mod serde_complex;
pub mod tomography;

pub use compiler::{
    compile_rotation, projection_rotation, rotation_for_state, rotation_for_target, target_unitary, Axis, CompiledGate,
    RotationSpec, TargetState,
};
pub use density::{initial_state, DensityMatrix, Level};
pub use dynamics::{
    evolve, evolve_piecewise, free_evolve, hamiltonian_at, ConstantSegment, Dissipator, EvolutionSettings, Hamiltonian,
    Integrator, Propagator,
};
pub use error::{Error, Result};
pub use model::{
    calibrate_hf_sigma, sample_ensemble, DecoherenceSpec, EnsembleSpec, IonParams, LevelScheme, OpticalShape,
};
pub use pulse::{
    bright_dark_states, envelope, make_single_color, make_two_color, DriveColors, PulseSequence, SechypShape,
    TwoColorPulse,
};
pub use tomography::{
    fidelity, measure_z, qr_fidelity, reconstruct, run_tomography, PauliExpectations, TomographyRecord, World,
};
