use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::compiler::{compile_rotation, RotationSpec};
use crate::density::initial_state;
use crate::pulse::{bright_dark_states, make_single_color, make_two_color, DriveColors, SechypShape};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_err(a: &DensityMatrix, b: &Matrix4<Complex64>) -> f64 {
    (a.matrix() - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Full Lindblad generator acting on column-stacked ρ, built from jump
/// operators with no shortcuts shared with the kernel.
fn liouvillian(h: &Matrix4<Complex64>, dec: &DecoherenceSpec) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(4, 4);
    let hd = DMatrix::from_fn(4, 4, |i, j| h[(i, j)]);
    let mi = c(0.0, -1.0);
    let mut l = (id.kronecker(&hd) - hd.transpose().kronecker(&id)) * mi;
    let gamma = dec.decay_rate();
    let mut jumps = Vec::new();
    for (g, b) in dec.branching.iter().enumerate() {
        let mut j = DMatrix::zeros(4, 4);
        j[(g, 3)] = c((gamma * b).sqrt(), 0.0);
        jumps.push(j);
    }
    let mut deph = DMatrix::zeros(4, 4);
    deph[(3, 3)] = c((2.0 * dec.pure_dephasing_rate()).sqrt(), 0.0);
    jumps.push(deph);
    for j in jumps {
        let jd = j.adjoint();
        let jdj = &jd * &j;
        l += j.conjugate().kronecker(&j) - (id.kronecker(&jdj) + jdj.transpose().kronecker(&id)) * c(0.5, 0.0);
    }
    l
}

fn exact_evolve(rho: &DensityMatrix, h: &Hamiltonian, dec: &DecoherenceSpec, t: f64) -> Matrix4<Complex64> {
    let l = liouvillian(&h.to_matrix(), dec) * c(t, 0.0);
    let v = DVector::from_iterator(16, rho.matrix().iter().copied());
    let out = l.exp() * v;
    Matrix4::from_iterator(out.iter().copied())
}

fn plus_state() -> DensityMatrix {
    let a = c(0.5_f64.sqrt(), 0.0);
    DensityMatrix::from_qubit(a, a).unwrap()
}

fn mixed_state() -> DensityMatrix {
    let v = [c(0.5, 0.1), c(0.3, -0.4), c(0.2, 0.0), c(0.1, 0.3)];
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let p = DensityMatrix::pure(v.map(|z| z / n)).unwrap().into_matrix();
    let m = p * c(0.7, 0.0) + initial_state().into_matrix() * c(0.2, 0.0);
    let mut e = Matrix4::zeros();
    e[(3, 3)] = c(0.1, 0.0);
    DensityMatrix::new(m + e).unwrap()
}

#[test]
fn zero_drive_and_zero_detuning_leaves_state_unchanged() {
    let rho = plus_state();
    let seq = PulseSequence::empty(10e-6);
    let out = evolve(
        &rho,
        &seq,
        &IonParams::IDEAL,
        &DecoherenceSpec::none(),
        &EvolutionSettings::default(),
        &LevelScheme::default(),
    )
    .unwrap();
    assert!(max_err(&out, rho.matrix()) < 1e-15);
}

#[test]
fn square_pi_pulse_matches_rabi_formula() {
    let omega = 2.0 * PI * 1.0e6;
    let h = Hamiltonian::driven(&IonParams::IDEAL, c(omega, 0.0), c(0.0, 0.0));
    for fraction in [0.25, 0.5, 1.0] {
        let t = fraction * PI / omega;
        let seg = ConstantSegment {
            hamiltonian: h,
            duration: t,
        };
        let out = evolve_piecewise(
            &initial_state(),
            &[seg],
            &DecoherenceSpec::none(),
            &EvolutionSettings::default(),
        )
        .unwrap();
        let expected = (omega * t / 2.0).sin().powi(2);
        assert!(
            (out.population(Level::Excited) - expected).abs() < 1e-6,
            "fraction {fraction}"
        );
    }
}

fn oracle_cases() -> Vec<Hamiltonian> {
    let ion = IonParams {
        delta_opt: 2.0 * PI * 120e3,
        delta_hf: 2.0 * PI * 9e3,
        rabi_scale: 1.1,
    };
    let omega = 2.0 * PI * 2e6;
    vec![
        Hamiltonian::driven(&ion, c(omega, 0.0), c(0.0, omega)),
        Hamiltonian::driven(&ion, Complex64::from_polar(omega, 0.7), c(0.0, 0.0)),
        Hamiltonian::driven(&IonParams::IDEAL, c(omega, 0.0), c(omega, 0.0)),
        Hamiltonian::free(&ion),
    ]
}

fn oracle_error(h: &Hamiltonian, rho: &DensityMatrix, dec: &DecoherenceSpec, s: &EvolutionSettings, t: f64) -> f64 {
    let seg = ConstantSegment {
        hamiltonian: *h,
        duration: t,
    };
    let got = evolve_piecewise(rho, &[seg], dec, s).unwrap();
    max_err(&got, &exact_evolve(rho, h, dec, t))
}

#[test]
fn rk4_step_agrees_with_matrix_exponential() {
    let s = EvolutionSettings::default();
    for dec in [DecoherenceSpec::none(), DecoherenceSpec::default()] {
        for h in oracle_cases() {
            for rho in [initial_state(), mixed_state()] {
                assert!(oracle_error(&h, &rho, &dec, &s, s.dt_max) <= 1e-8);
                assert!(oracle_error(&h, &rho, &dec, &s, 4.4e-6) <= 1e-6);
            }
        }
    }
}

#[test]
fn adaptive_agrees_with_matrix_exponential_per_segment() {
    let s = EvolutionSettings {
        integrator: Integrator::Rk45Adaptive,
        ..EvolutionSettings::default()
    };
    for dec in [DecoherenceSpec::none(), DecoherenceSpec::default()] {
        for (i, h) in oracle_cases().iter().enumerate() {
            for rho in [initial_state(), mixed_state()] {
                let err = oracle_error(h, &rho, &dec, &s, 4.4e-6);
                assert!(err <= 1e-8, "case {i}: error {err:e}");
            }
        }
    }
}

#[test]
fn free_evolution_matches_closed_form() {
    let dec = DecoherenceSpec::default();
    let ion = IonParams {
        delta_opt: 2.0 * PI * 50e3,
        delta_hf: 2.0 * PI * 10e3,
        rabi_scale: 1.0,
    };
    let rho = mixed_state();
    let t = 7.3e-6;
    let got = free_evolve(&rho, t, &ion, &dec).unwrap();
    let want = exact_evolve(&rho, &Hamiltonian::free(&ion), &dec, t);
    assert!(max_err(&got, &want) < 1e-12);
}

#[test]
fn excited_population_falls_to_one_over_e_after_t1() {
    let mut psi = [c(0.0, 0.0); 4];
    psi[3] = c(1.0, 0.0);
    let rho = DensityMatrix::pure(psi).unwrap();
    let dec = DecoherenceSpec::default();
    let out = free_evolve(&rho, dec.t1_excited, &IonParams::IDEAL, &dec).unwrap();
    assert!((out.population(Level::Excited) - (-1.0_f64).exp()).abs() < 1e-9);
    let lost = 1.0 - (-1.0_f64).exp();
    assert!((out.population(Level::Aux) - 0.10 * lost).abs() < 1e-9);
}

#[test]
fn qubit_coherence_precesses_at_hyperfine_detuning() {
    let ion = IonParams {
        delta_hf: 2.0 * PI * 10e3,
        ..IonParams::IDEAL
    };
    let t = 25e-6;
    let out = free_evolve(&plus_state(), t, &ion, &DecoherenceSpec::none()).unwrap();
    let r01 = out.element(Level::Zero, Level::One);
    assert!((r01.norm() - 0.5).abs() < 1e-12);
    assert!((r01.arg() - PI / 2.0).abs() < 1e-9);
}

#[test]
fn free_evolve_rejects_negative_duration() {
    let r = free_evolve(&initial_state(), -1e-6, &IonParams::IDEAL, &DecoherenceSpec::none());
    assert!(matches!(r, Err(Error::Domain(_))));
    let same = free_evolve(&mixed_state(), 0.0, &IonParams::IDEAL, &DecoherenceSpec::default()).unwrap();
    assert!(max_err(&same, mixed_state().matrix()) < 1e-15);
}

#[test]
fn halving_the_step_changes_the_result_by_less_than_1e_7() {
    let shape = SechypShape::default();
    let gate = compile_rotation(RotationSpec::new(1.1, 0.4).unwrap(), &shape, 0.0).unwrap();
    let ion = IonParams {
        delta_opt: 2.0 * PI * 80e3,
        delta_hf: 0.0,
        rabi_scale: 0.9,
    };
    let run = |dt: f64| {
        let settings = EvolutionSettings {
            dt_max: dt,
            ..EvolutionSettings::default()
        };
        evolve(
            &initial_state(),
            &gate.sequence,
            &ion,
            &DecoherenceSpec::default(),
            &settings,
            &LevelScheme::default(),
        )
        .unwrap()
    };
    let coarse = run(2e-9);
    let fine = run(1e-9);
    assert!(max_err(&coarse, fine.matrix()) < 1e-7);
}

#[test]
fn adaptive_and_fixed_step_agree_on_a_gate() {
    let shape = SechypShape::default();
    let gate = compile_rotation(RotationSpec::new(PI / 2.0, PI / 2.0).unwrap(), &shape, 0.0).unwrap();
    let ion = IonParams {
        delta_opt: -2.0 * PI * 60e3,
        delta_hf: 2.0 * PI * 3e3,
        rabi_scale: 1.05,
    };
    let run = |integrator| {
        let settings = EvolutionSettings {
            integrator,
            rel_tol: 1e-9,
            ..EvolutionSettings::default()
        };
        evolve(
            &initial_state(),
            &gate.sequence,
            &ion,
            &DecoherenceSpec::default(),
            &settings,
            &LevelScheme::default(),
        )
        .unwrap()
    };
    let a = run(Integrator::Rk4Fixed);
    let b = run(Integrator::Rk45Adaptive);
    assert!(max_err(&a, b.matrix()) < 1e-6);
}

#[test]
fn dark_state_stays_dark() {
    let shape = SechypShape::default();
    for phi in [0.0, 0.9, PI, 4.0] {
        let (_, dark) = bright_dark_states(phi);
        let rho0 = DensityMatrix::from_qubit(dark[0], dark[1]).unwrap();
        let seq = PulseSequence::new(vec![make_two_color(shape, phi, 0.3, 0.0)], None).unwrap();
        let prop = Propagator::new(&seq, &LevelScheme::default(), &EvolutionSettings::default()).unwrap();
        let mut peak: f64 = 0.0;
        let out = prop
            .evolve_observed(
                &rho0,
                &IonParams::IDEAL,
                &Dissipator::new(&DecoherenceSpec::none()),
                &mut |_, s| peak = peak.max(s.population(Level::Excited)),
            )
            .unwrap();
        assert!(peak <= 1e-3, "phi {phi}: peak {peak}");
        let f = (dark.adjoint() * out.qubit_block() * dark)[(0, 0)].re;
        assert!(f >= 0.999);
    }
}

#[test]
fn bright_state_is_inverted() {
    let shape = SechypShape::default();
    let phi = 1.3;
    let (bright, _) = bright_dark_states(phi);
    let rho0 = DensityMatrix::from_qubit(bright[0], bright[1]).unwrap();
    let seq = PulseSequence::new(vec![make_two_color(shape, phi, 0.0, 0.0)], None).unwrap();
    let out = evolve(
        &rho0,
        &seq,
        &IonParams::IDEAL,
        &DecoherenceSpec::none(),
        &EvolutionSettings::default(),
        &LevelScheme::default(),
    )
    .unwrap();
    assert!(out.population(Level::Excited) >= 0.999);
}

#[test]
fn single_color_pair_transfers_zero_to_one() {
    let shape = SechypShape::default();
    let up = make_single_color(shape, DriveColors::OnlyZero, 0.0, 0.0);
    let down = make_single_color(shape, DriveColors::OnlyOne, 0.0, shape.t_total);
    let seq = PulseSequence::new(vec![up, down], None).unwrap();
    let out = evolve(
        &initial_state(),
        &seq,
        &IonParams::IDEAL,
        &DecoherenceSpec::none(),
        &EvolutionSettings::default(),
        &LevelScheme::default(),
    )
    .unwrap();
    assert!(out.population(Level::One) >= 0.999);
}

#[test]
fn hamiltonian_examples() {
    let ion = IonParams {
        delta_opt: 2.0 * PI * 100e3,
        delta_hf: 2.0 * PI * 5e3,
        rabi_scale: 0.8,
    };
    let free = hamiltonian_at(&ion, None, &LevelScheme::default(), 1e-6, false);
    assert_eq!(free.c0, c(0.0, 0.0));
    assert_eq!(free.diag[3], ion.delta_opt);
    assert!((free.diag[1] - free.diag[0] - ion.delta_hf).abs() < 1e-9);

    let shape = SechypShape::default();
    let p = make_two_color(shape, 0.5, 0.0, 0.0);
    let t = shape.center();
    let h = hamiltonian_at(&IonParams::IDEAL, Some(&p), &LevelScheme::default(), t, false);
    assert!((h.c0.norm() - shape.omega_peak / 2.0).abs() < 1e-6);
    assert!((h.c1.norm() - shape.omega_peak / 2.0).abs() < 1e-6);
    let m = h.to_matrix();
    assert!((m - m.adjoint()).norm() < 1e-12);

    let cross = hamiltonian_at(&IonParams::IDEAL, Some(&p), &LevelScheme::default(), t, true);
    assert!((cross.c0 - h.c0).norm() > 1.0);
}

#[test]
fn mismatched_ensemble_lengths_are_rejected() {
    let seq = PulseSequence::empty(1e-6);
    let prop = Propagator::new(&seq, &LevelScheme::default(), &EvolutionSettings::default()).unwrap();
    let r = prop.evolve_ensemble(&[initial_state()], &[], &Dissipator::new(&DecoherenceSpec::none()));
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn bad_settings_are_rejected_with_field() {
    let s = EvolutionSettings {
        dt_max: 0.0,
        ..EvolutionSettings::default()
    };
    assert!(matches!(s.validate(), Err(Error::Config { field: "dt_max", .. })));
    let s = EvolutionSettings {
        rel_tol: 0.1,
        ..EvolutionSettings::default()
    };
    assert!(matches!(s.validate(), Err(Error::Config { field: "rel_tol", .. })));
}

#[test]
fn divergent_hamiltonian_reports_numerical_error() {
    let settings = EvolutionSettings {
        integrator: Integrator::Rk45Adaptive,
        ..EvolutionSettings::default()
    };
    let seg = ConstantSegment {
        hamiltonian: Hamiltonian::driven(&IonParams::IDEAL, c(f64::INFINITY, 0.0), c(0.0, 0.0)),
        duration: 1e-6,
    };
    let r = evolve_piecewise(&initial_state(), &[seg], &DecoherenceSpec::none(), &settings);
    assert!(matches!(r, Err(Error::Numerical { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_preserves_density_matrix_invariants(
        theta in 0.0..2.0 * PI,
        phi in 0.0..2.0 * PI,
        d_opt in -300e3..300e3_f64,
        d_hf in -20e3..20e3_f64,
        scale in 0.8..1.2_f64,
    ) {
        let ion = IonParams {
            delta_opt: 2.0 * PI * d_opt,
            delta_hf: 2.0 * PI * d_hf,
            rabi_scale: scale,
        };
        let gate = compile_rotation(RotationSpec::new(theta, phi).unwrap(), &SechypShape::default(), 0.0).unwrap();
        let out = evolve(
            &mixed_state(),
            &gate.sequence,
            &ion,
            &DecoherenceSpec::default(),
            &EvolutionSettings::default(),
            &LevelScheme::default(),
        )
        .unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(out.trace().im.abs() < 1e-12);
        prop_assert!(out.hermiticity_error() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-8);
    }
}
