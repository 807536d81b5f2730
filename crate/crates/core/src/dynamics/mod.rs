//! Rotating-frame Lindblad evolution of a single ion, and its ensemble fan-out.
//!
//! Each optical leg has its own frame co-rotating with its carrier, so the
//! qubit splitting never appears explicitly unless cross coupling is enabled.
//! The Hamiltonian is
//!
//! ```text
//! H = δ_opt|e⟩⟨e| − (δ_hf/2)|0⟩⟨0| + (δ_hf/2)|1⟩⟨1|
//!     + (s/2)(E₀(t)|e⟩⟨0| − E₁(t)|e⟩⟨1|) + h.c.
//! ```
//!
//! where `s` is the ion's Rabi scale and E₀, E₁ are the complex drives of
//! the two colors. With E₁ = E₀·e^{iφ} the state (|0⟩ + e^{−iφ}|1⟩)/√2 is
//! exactly dark.

mod kernel;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::Dissipator;
use kernel::{Rho, ZERO};

use crate::density::{DensityMatrix, Level};
use crate::error::{Error, Result};
use crate::model::{DecoherenceSpec, IonParams, LevelScheme};
use crate::pulse::{PulseSequence, TwoColorPulse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSettings {
    /// Maximum (and, for RK4, nominal) step in seconds.
    pub dt_max: f64,
    pub integrator: Integrator,
    /// Let each color also drive the other leg, detuned by the qubit splitting.
    pub include_cross_coupling: bool,
    /// Relative tolerance of the adaptive integrator.
    pub rel_tol: f64,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        EvolutionSettings {
            dt_max: 2e-9,
            integrator: Integrator::Rk4Fixed,
            include_cross_coupling: false,
            rel_tol: 1e-7,
        }
    }
}

impl EvolutionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return Err(Error::config("dt_max", "must be finite and > 0"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::config("rel_tol", "must lie in (0, 1e-3]"));
        }
        Ok(())
    }
}

/// Rotating-frame Hamiltonian (rad/s) in the structured form the model
/// admits: a real diagonal plus the two optical couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian {
    pub diag: [f64; 4],
    /// ⟨e|H|0⟩
    pub c0: Complex64,
    /// ⟨e|H|1⟩
    pub c1: Complex64,
}

impl Hamiltonian {
    /// Drive-free part for `ion`.
    #[inline]
    pub fn free(ion: &IonParams) -> Self {
        Hamiltonian {
            diag: [-0.5 * ion.delta_hf, 0.5 * ion.delta_hf, 0.0, ion.delta_opt],
            c0: ZERO,
            c1: ZERO,
        }
    }

    /// `ion` driven with complex Rabi frequencies `leg0` on |0⟩–|e⟩ and
    /// `leg1` on |1⟩–|e⟩.
    #[inline]
    pub fn driven(ion: &IonParams, leg0: Complex64, leg1: Complex64) -> Self {
        let half = 0.5 * ion.rabi_scale;
        Hamiltonian {
            c0: leg0 * half,
            c1: -leg1 * half,
            ..Self::free(ion)
        }
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        m[(3, 0)] = self.c0;
        m[(0, 3)] = self.c0.conj();
        m[(3, 1)] = self.c1;
        m[(1, 3)] = self.c1.conj();
        m
    }
}

/// Drives seen by each leg at absolute time `t`. With cross coupling each
/// color also reaches the other leg, offset by the qubit splitting.
#[inline]
fn leg_drives(pulse: &TwoColorPulse, t: f64, cross_omega: Option<f64>) -> (Complex64, Complex64) {
    let (e0, e1) = pulse.drives(t);
    match cross_omega {
        None => (e0, e1),
        Some(w) => {
            let rot = Complex64::from_polar(1.0, w * t);
            (e0 + e1 * rot.conj(), e1 + e0 * rot)
        }
    }
}

/// Hamiltonian of `ion` at time `t`, with `pulse` the pulse active at `t` if any.
pub fn hamiltonian_at(
    ion: &IonParams,
    pulse: Option<&TwoColorPulse>,
    scheme: &LevelScheme,
    t: f64,
    include_cross_coupling: bool,
) -> Hamiltonian {
    match pulse {
        None => Hamiltonian::free(ion),
        Some(p) => {
            let cross = include_cross_coupling.then(|| 2.0 * std::f64::consts::PI * scheme.qubit_splitting);
            let (l0, l1) = leg_drives(p, t, cross);
            Hamiltonian::driven(ion, l0, l1)
        }
    }
}

fn to_rho(m: &DensityMatrix) -> Rho {
    let m = m.matrix();
    let mut r = [[ZERO; 4]; 4];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    r
}

fn from_rho(r: &Rho) -> DensityMatrix {
    DensityMatrix::from_raw(Matrix4::from_fn(|i, j| r[i][j]))
}

/// Read-only view of the state handed to observers.
pub struct Snapshot<'a>(&'a Rho);

impl Snapshot<'_> {
    #[inline]
    pub fn population(&self, level: Level) -> f64 {
        let i = level.index();
        self.0[i][i].re
    }

    #[inline]
    pub fn element(&self, row: Level, col: Level) -> Complex64 {
        self.0[row.index()][col.index()]
    }

    pub fn to_density(&self) -> DensityMatrix {
        from_rho(self.0)
    }
}

#[derive(Debug, Clone)]
enum SegmentKind {
    Free,
    Driven {
        pulse: TwoColorPulse,
        steps: usize,
        /// Leg drives on the half-step grid (RK4 only), 2·steps + 1 entries.
        samples: Vec<(Complex64, Complex64)>,
    },
}

#[derive(Debug, Clone)]
struct Segment {
    start: f64,
    duration: f64,
    kind: SegmentKind,
}

/// A pulse sequence prepared for repeated evolution of many ions: segment
/// boundaries are fixed and the drive is pre-sampled once.
#[derive(Debug, Clone)]
pub struct Propagator {
    segments: Vec<Segment>,
    settings: EvolutionSettings,
    cross_omega: Option<f64>,
}

/// Number of equal steps no longer than `dt_max` covering `duration`.
fn step_count(duration: f64, dt_max: f64) -> usize {
    ((duration / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

impl Propagator {
    pub fn new(seq: &PulseSequence, scheme: &LevelScheme, settings: &EvolutionSettings) -> Result<Self> {
        settings.validate()?;
        let cross_omega = settings
            .include_cross_coupling
            .then(|| 2.0 * std::f64::consts::PI * scheme.qubit_splitting);
        let mut segments = Vec::new();
        let mut cursor = 0.0;
        for p in seq.pulses() {
            if p.start_time > cursor {
                segments.push(Segment {
                    start: cursor,
                    duration: p.start_time - cursor,
                    kind: SegmentKind::Free,
                });
            }
            let duration = p.shape.t_total;
            let steps = step_count(duration, settings.dt_max);
            let samples = match settings.integrator {
                Integrator::Rk4Fixed => {
                    let half = 0.5 * duration / steps as f64;
                    (0..=2 * steps)
                        .map(|m| leg_drives(p, p.start_time + m as f64 * half, cross_omega))
                        .collect()
                }
                Integrator::Rk45Adaptive => Vec::new(),
            };
            segments.push(Segment {
                start: p.start_time,
                duration,
                kind: SegmentKind::Driven {
                    pulse: *p,
                    steps,
                    samples,
                },
            });
            cursor = p.end_time();
        }
        if seq.total_duration() > cursor {
            segments.push(Segment {
                start: cursor,
                duration: seq.total_duration() - cursor,
                kind: SegmentKind::Free,
            });
        }
        Ok(Propagator {
            segments,
            settings: settings.clone(),
            cross_omega,
        })
    }

    pub fn duration(&self) -> f64 {
        self.segments.last().map(|s| s.start + s.duration).unwrap_or(0.0)
    }

    pub fn evolve(&self, rho0: &DensityMatrix, ion: &IonParams, diss: &Dissipator) -> Result<DensityMatrix> {
        self.run(rho0, ion, diss, None)
    }

    /// Like [`evolve`](Self::evolve), calling `observer(t, state)` at the
    /// start and after every step.
    pub fn evolve_observed(
        &self,
        rho0: &DensityMatrix,
        ion: &IonParams,
        diss: &Dissipator,
        observer: &mut dyn FnMut(f64, Snapshot<'_>),
    ) -> Result<DensityMatrix> {
        self.run(rho0, ion, diss, Some(observer))
    }

    /// Evolves and also returns ∫P_e dt over the sequence (trapezoid rule on
    /// the step grid).
    pub fn evolve_with_dwell(
        &self,
        rho0: &DensityMatrix,
        ion: &IonParams,
        diss: &Dissipator,
    ) -> Result<(DensityMatrix, f64)> {
        let mut dwell = 0.0;
        let mut last: Option<(f64, f64)> = None;
        let rho = self.evolve_observed(rho0, ion, diss, &mut |t, s| {
            let pe = s.population(Level::Excited);
            if let Some((t0, p0)) = last {
                dwell += 0.5 * (pe + p0) * (t - t0);
            }
            last = Some((t, pe));
        })?;
        Ok((rho, dwell))
    }

    /// Evolves every ion from its own starting state. Output order follows
    /// `ions`; the result does not depend on the worker count.
    pub fn evolve_ensemble(
        &self,
        states: &[DensityMatrix],
        ions: &[IonParams],
        diss: &Dissipator,
    ) -> Result<Vec<DensityMatrix>> {
        check_lengths(states, ions)?;
        states
            .par_iter()
            .zip(ions.par_iter())
            .map(|(rho, ion)| self.evolve(rho, ion, diss))
            .collect()
    }

    /// Ensemble evolution returning each ion's final state and excited dwell time.
    pub fn evolve_ensemble_with_dwell(
        &self,
        states: &[DensityMatrix],
        ions: &[IonParams],
        diss: &Dissipator,
    ) -> Result<Vec<(DensityMatrix, f64)>> {
        check_lengths(states, ions)?;
        states
            .par_iter()
            .zip(ions.par_iter())
            .map(|(rho, ion)| self.evolve_with_dwell(rho, ion, diss))
            .collect()
    }

    fn run(
        &self,
        rho0: &DensityMatrix,
        ion: &IonParams,
        diss: &Dissipator,
        mut observer: Option<&mut dyn FnMut(f64, Snapshot<'_>)>,
    ) -> Result<DensityMatrix> {
        let mut r = to_rho(rho0);
        let t_begin = self.segments.first().map(|s| s.start).unwrap_or(0.0);
        if let Some(obs) = observer.as_deref_mut() {
            obs(t_begin, Snapshot(&r));
        }
        let free_diag = Hamiltonian::free(ion).diag;
        for seg in &self.segments {
            match &seg.kind {
                SegmentKind::Free => match observer.as_deref_mut() {
                    None => r = kernel::free_propagate(&r, &free_diag, diss, seg.duration),
                    Some(obs) => {
                        let n = step_count(seg.duration, self.settings.dt_max);
                        let h = seg.duration / n as f64;
                        for i in 1..=n {
                            r = kernel::free_propagate(&r, &free_diag, diss, h);
                            obs(seg.start + i as f64 * h, Snapshot(&r));
                        }
                    }
                },
                SegmentKind::Driven { pulse, steps, samples } => match self.settings.integrator {
                    Integrator::Rk4Fixed => {
                        let h = seg.duration / *steps as f64;
                        let ham = |m: usize| {
                            let (l0, l1) = samples[m];
                            Hamiltonian::driven(ion, l0, l1)
                        };
                        let mut h_start = ham(0);
                        for i in 0..*steps {
                            let h_mid = ham(2 * i + 1);
                            let h_end = ham(2 * i + 2);
                            r = kernel::rk4_step(&r, &h_start, &h_mid, &h_end, h, diss);
                            h_start = h_end;
                            if let Some(obs) = observer.as_deref_mut() {
                                obs(seg.start + (i + 1) as f64 * h, Snapshot(&r));
                            }
                        }
                    }
                    Integrator::Rk45Adaptive => {
                        let cross = self.cross_omega;
                        let ham = |t: f64| {
                            let (l0, l1) = leg_drives(pulse, t, cross);
                            Hamiltonian::driven(ion, l0, l1)
                        };
                        r = adaptive(r, seg.start, seg.duration, &ham, diss, &self.settings, &mut observer)?;
                    }
                },
            }
            check_finite(&r, seg.start + seg.duration)?;
        }
        Ok(from_rho(&r))
    }
}

fn check_finite(r: &Rho, time: f64) -> Result<()> {
    if kernel::is_finite(r) {
        Ok(())
    } else {
        Err(Error::Numerical {
            time,
            reason: "state became non-finite".into(),
        })
    }
}

fn check_lengths(states: &[DensityMatrix], ions: &[IonParams]) -> Result<()> {
    if states.len() != ions.len() {
        return Err(Error::Domain(format!(
            "{} starting states for {} ions",
            states.len(),
            ions.len()
        )));
    }
    Ok(())
}

fn adaptive<H>(
    mut r: Rho,
    start: f64,
    duration: f64,
    ham: &H,
    diss: &Dissipator,
    settings: &EvolutionSettings,
    observer: &mut Option<&mut dyn FnMut(f64, Snapshot<'_>)>,
) -> Result<Rho>
where
    H: Fn(f64) -> Hamiltonian,
{
    let end = start + duration;
    let dt_min = settings.dt_max * 1e-9;
    let mut t = start;
    let mut dt = settings.dt_max;
    while t < end {
        let step = dt.min(end - t);
        let (next, err) = kernel::dp45_trial(&r, t, step, ham, diss, settings.rel_tol);
        let factor = if !err.is_finite() {
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            r = next;
            t = if end - (t + step) < dt_min { end } else { t + step };
            if let Some(obs) = observer.as_deref_mut() {
                obs(t, Snapshot(&r));
            }
        }
        dt = (step * factor).min(settings.dt_max);
        if dt < dt_min && t < end {
            return Err(Error::Numerical {
                time: t,
                reason: format!("step size fell below {dt_min:e} s at rel_tol {:e}", settings.rel_tol),
            });
        }
    }
    Ok(r)
}

/// Integrates ρ̇ = −i[H(t), ρ] + L(ρ) over the whole of `seq`.
pub fn evolve(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    ion: &IonParams,
    dec: &DecoherenceSpec,
    settings: &EvolutionSettings,
    scheme: &LevelScheme,
) -> Result<DensityMatrix> {
    dec.validate()?;
    Propagator::new(seq, scheme, settings)?.evolve(rho0, ion, &Dissipator::new(dec))
}

/// A span of constant Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSegment {
    pub hamiltonian: Hamiltonian,
    pub duration: f64,
}

/// Integrates over consecutive constant-Hamiltonian segments with the
/// configured integrator. Used for square pulses and for checking the
/// integrator against exact propagators.
pub fn evolve_piecewise(
    rho0: &DensityMatrix,
    segments: &[ConstantSegment],
    dec: &DecoherenceSpec,
    settings: &EvolutionSettings,
) -> Result<DensityMatrix> {
    settings.validate()?;
    dec.validate()?;
    let diss = Dissipator::new(dec);
    let mut r = to_rho(rho0);
    let mut t = 0.0;
    for seg in segments {
        if !(seg.duration >= 0.0) {
            return Err(Error::Domain(format!("segment duration {} < 0", seg.duration)));
        }
        let h = seg.hamiltonian;
        match settings.integrator {
            Integrator::Rk4Fixed => {
                let n = step_count(seg.duration, settings.dt_max);
                let dt = seg.duration / n as f64;
                for _ in 0..n {
                    r = kernel::rk4_step(&r, &h, &h, &h, dt, &diss);
                }
            }
            Integrator::Rk45Adaptive => {
                r = adaptive(r, t, seg.duration, &|_| h, &diss, settings, &mut None)?;
            }
        }
        t += seg.duration;
        check_finite(&r, t)?;
    }
    Ok(from_rho(&r))
}

/// Exact drive-free evolution: qubit coherence precesses at δ_hf, |e⟩
/// decays with T1 and optical coherences decay with T2.
pub fn free_evolve(
    rho: &DensityMatrix,
    duration: f64,
    ion: &IonParams,
    dec: &DecoherenceSpec,
) -> Result<DensityMatrix> {
    if !(duration >= 0.0) {
        return Err(Error::Domain(format!("duration must be ≥ 0, got {duration}")));
    }
    let r = kernel::free_propagate(
        &to_rho(rho),
        &Hamiltonian::free(ion).diag,
        &Dissipator::new(dec),
        duration,
    );
    Ok(from_rho(&r))
}

#[cfg(test)]
mod tests;
