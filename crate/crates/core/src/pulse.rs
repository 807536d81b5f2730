//! Complex hyperbolic secant ("sechyp") pulses and their two-color form.
//!
//! A sechyp pulse has amplitude `Ω(t) = Ω₀ sech(β(t − t₀))` and instantaneous
//! detuning `ν(t) = ν_c + μβ tanh(β(t − t₀))`. Both colors of a
//! [`TwoColorPulse`] share this envelope and chirp; they differ only in their
//! overall phase (ψ on the ω₀ color, ψ + φ on the ω₁ color).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::QubitState;

/// arccosh(2): sech(x) = 1/2 at this argument.
pub const ACOSH_2: f64 = 1.316_957_896_924_816_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SechypShape {
    /// Peak Rabi frequency of one color (rad/s).
    pub omega_peak: f64,
    /// FWHM of the sech amplitude (s).
    pub t_fwhm: f64,
    /// Truncated duration (s); the peak sits at `t_total / 2`.
    pub t_total: f64,
    /// Dimensionless chirp parameter.
    pub mu: f64,
    /// Center detuning of the carrier from the addressed transition (rad/s).
    pub carrier_offset: f64,
}

impl Default for SechypShape {
    fn default() -> Self {
        SechypShape {
            omega_peak: 2.0 * PI * 2.0e6,
            t_fwhm: 1.2e-6,
            t_total: 4.4e-6,
            mu: 4.0,
            carrier_offset: 0.0,
        }
    }
}

impl SechypShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_peak > 0.0) || !self.omega_peak.is_finite() {
            return Err(Error::config("omega_peak", "must be finite and > 0"));
        }
        if !(self.t_fwhm > 0.0) || !self.t_fwhm.is_finite() {
            return Err(Error::config("t_fwhm", "must be finite and > 0"));
        }
        if !(self.t_total >= 2.0 * self.t_fwhm) || !self.t_total.is_finite() {
            return Err(Error::config("t_total", "must be ≥ 2·t_fwhm"));
        }
        if !self.mu.is_finite() || !self.carrier_offset.is_finite() {
            return Err(Error::config("mu", "chirp parameters must be finite"));
        }
        Ok(())
    }

    /// Steepness β = 2 arccosh(2) / t_fwhm (1/s).
    #[inline]
    pub fn beta(&self) -> f64 {
        2.0 * ACOSH_2 / self.t_fwhm
    }

    #[inline]
    pub fn center(&self) -> f64 {
        0.5 * self.t_total
    }

    /// Instantaneous angular detuning ν(t) of the carrier (rad/s).
    pub fn detuning(&self, t: f64) -> f64 {
        let beta = self.beta();
        self.carrier_offset + self.mu * beta * (beta * (t - self.center())).tanh()
    }

    /// Accumulated chirp phase ϕ(t), the integral of ν from the pulse center.
    pub fn phase(&self, t: f64) -> f64 {
        let tau = t - self.center();
        self.carrier_offset * tau + self.mu * ln_cosh(self.beta() * tau)
    }

    /// Ω(t)·e^{iϕ(t)}, without the support check.
    #[inline]
    pub(crate) fn envelope_unchecked(&self, t: f64) -> Complex64 {
        let beta = self.beta();
        let x = beta * (t - self.center());
        let amp = self.omega_peak / x.cosh();
        let phase = self.carrier_offset * (t - self.center()) + self.mu * ln_cosh(x);
        Complex64::from_polar(amp, phase)
    }
}

/// ln cosh(x), stable for large |x|.
#[inline]
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Complex drive Ω(t)·e^{iϕ(t)} (rad/s) of `shape` at time `t` into the pulse.
pub fn envelope(shape: &SechypShape, t: f64) -> Result<Complex64> {
    if !(0.0..=shape.t_total).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t:e} s outside pulse support [0, {:e}]",
            shape.t_total
        )));
    }
    Ok(shape.envelope_unchecked(t))
}

/// Normalized bright and dark states for relative phase φ:
/// |B⟩ = (|0⟩ − e^{−iφ}|1⟩)/√2, |D⟩ = (|0⟩ + e^{−iφ}|1⟩)/√2.
pub fn bright_dark_states(phi: f64) -> (QubitState, QubitState) {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let rot = Complex64::from_polar(FRAC_1_SQRT_2, -phi);
    (QubitState::new(s, -rot), QubitState::new(s, rot))
}

/// Which of the two carriers a pulse actually emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveColors {
    #[default]
    Both,
    /// Only the ω₀ color, on the |0⟩–|e⟩ leg.
    OnlyZero,
    /// Only the ω₁ color, on the |1⟩–|e⟩ leg.
    OnlyOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoColorPulse {
    pub shape: SechypShape,
    /// Relative phase of the ω₁ color with respect to ω₀.
    pub phi: f64,
    /// Phase common to both colors.
    pub psi: f64,
    pub start_time: f64,
    pub colors: DriveColors,
}

impl TwoColorPulse {
    #[inline]
    pub fn end_time(&self) -> f64 {
        self.start_time + self.shape.t_total
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_time && t <= self.end_time()
    }

    /// Complex drives (ω₀ color, ω₁ color) at absolute time `t`.
    #[inline]
    pub fn drives(&self, t: f64) -> (Complex64, Complex64) {
        let e = self.shape.envelope_unchecked(t - self.start_time);
        let zero = Complex64::new(0.0, 0.0);
        let d0 = e * Complex64::from_polar(1.0, self.psi);
        let d1 = e * Complex64::from_polar(1.0, self.psi + self.phi);
        match self.colors {
            DriveColors::Both => (d0, d1),
            DriveColors::OnlyZero => (d0, zero),
            DriveColors::OnlyOne => (zero, d1),
        }
    }
}

/// Two-color pulse with both carriers sharing `shape`.
pub fn make_two_color(shape: SechypShape, phi: f64, psi: f64, start_time: f64) -> TwoColorPulse {
    TwoColorPulse {
        shape,
        phi,
        psi,
        start_time,
        colors: DriveColors::Both,
    }
}

/// A pulse emitted on only one of the two carriers.
pub fn make_single_color(shape: SechypShape, colors: DriveColors, psi: f64, start_time: f64) -> TwoColorPulse {
    TwoColorPulse {
        shape,
        phi: 0.0,
        psi,
        start_time,
        colors,
    }
}

/// Time-ordered, non-overlapping pulses starting at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pulses: Vec<TwoColorPulse>,
    total_duration: f64,
}

impl PulseSequence {
    /// Builds a sequence spanning [0, `total_duration`]. `total_duration`
    /// defaults to the end of the last pulse.
    pub fn new(pulses: Vec<TwoColorPulse>, total_duration: Option<f64>) -> Result<Self> {
        let mut cursor = 0.0;
        for (i, p) in pulses.iter().enumerate() {
            p.shape.validate()?;
            if p.start_time < cursor - 1e-15 {
                return Err(Error::Domain(format!(
                    "pulse {i} starts at {:e} s, before the previous pulse ends ({cursor:e} s)",
                    p.start_time
                )));
            }
            cursor = p.end_time();
        }
        let total_duration = total_duration.unwrap_or(cursor);
        if total_duration < cursor - 1e-15 {
            return Err(Error::Domain(format!(
                "total duration {total_duration:e} s shorter than the pulses ({cursor:e} s)"
            )));
        }
        Ok(PulseSequence { pulses, total_duration })
    }

    /// Lays `pulses` end to end separated by `gap`, ignoring their start times.
    pub fn contiguous(pulses: impl IntoIterator<Item = TwoColorPulse>, gap: f64) -> Result<Self> {
        if !(gap >= 0.0) {
            return Err(Error::Domain(format!("gap must be ≥ 0, got {gap}")));
        }
        let mut t = 0.0;
        let mut laid = Vec::new();
        for (i, mut p) in pulses.into_iter().enumerate() {
            if i > 0 {
                t += gap;
            }
            p.start_time = t;
            t += p.shape.t_total;
            laid.push(p);
        }
        Self::new(laid, None)
    }

    pub fn empty(duration: f64) -> Self {
        PulseSequence {
            pulses: Vec::new(),
            total_duration: duration.max(0.0),
        }
    }

    /// `self` followed by `next` after a pause of `gap`.
    pub fn then(&self, next: &PulseSequence, gap: f64) -> Result<Self> {
        let offset = self.total_duration + gap;
        let mut pulses = self.pulses.clone();
        pulses.extend(next.pulses.iter().map(|p| TwoColorPulse {
            start_time: p.start_time + offset,
            ..*p
        }));
        Self::new(pulses, Some(offset + next.total_duration))
    }

    pub fn pulses(&self) -> &[TwoColorPulse] {
        &self.pulses
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    pub fn active_at(&self, t: f64) -> Option<&TwoColorPulse> {
        self.pulses.iter().find(|p| p.contains(t))
    }

    /// Samples the drive on both carriers and writes
    /// `time_s,amplitude0_rad_s,phase0_rad,amplitude1_rad_s,phase1_rad` rows.
    pub fn write_waveform_csv<W: Write>(&self, mut out: W, sample_rate: f64) -> io::Result<()> {
        writeln!(out, "time_s,amplitude0_rad_s,phase0_rad,amplitude1_rad_s,phase1_rad")?;
        if !(sample_rate > 0.0) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "sample rate must be > 0"));
        }
        let n = (self.total_duration * sample_rate).round() as usize;
        for k in 0..=n {
            let t = k as f64 / sample_rate;
            let (d0, d1) = self.active_at(t).map(|p| p.drives(t)).unwrap_or_default();
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                t,
                d0.norm(),
                d0.arg(),
                d1.norm(),
                d1.arg()
            )?;
        }
        Ok(())
    }
}
