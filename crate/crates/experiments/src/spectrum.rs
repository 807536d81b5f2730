//! Absorption spectra of the ensemble, as seen by a weak frequency scan.

use std::f64::consts::PI;

use darkgate::{IonParams, Level, LevelScheme};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ExperimentError, Result};

/// Scan grid and line shape, frequencies in Hz relative to the nominal
/// |0⟩ line.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// FWHM of the per-ion Lorentzian.
    pub homogeneous_width: f64,
    /// Peak αL of a fully |0⟩-populated ensemble.
    pub alpha_l_max: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        SpectrumSettings {
            start: -6e6,
            stop: 24e6,
            points: 3001,
            homogeneous_width: 250e3,
            alpha_l_max: 4.0,
        }
    }
}

impl SpectrumSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.stop > self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ExperimentError::config(
                "spectrum.stop_mhz",
                "must exceed spectrum.start_mhz",
            ));
        }
        if self.points < 2 {
            return Err(ExperimentError::config("spectrum.points", "must be ≥ 2"));
        }
        if !(self.homogeneous_width > 0.0) {
            return Err(ExperimentError::config("spectrum.homogeneous_width_khz", "must be > 0"));
        }
        if !(self.alpha_l_max > 0.0) {
            return Err(ExperimentError::config("spectrum.alpha_l_max", "must be > 0"));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTrace {
    pub frequency: Vec<f64>,
    pub alpha_l: Vec<f64>,
}

impl SpectrumTrace {
    /// Trapezoid integral of αL over the scan (Hz).
    pub fn integrated(&self) -> f64 {
        self.frequency
            .windows(2)
            .zip(self.alpha_l.windows(2))
            .map(|(f, a)| 0.5 * (a[0] + a[1]) * (f[1] - f[0]))
            .sum()
    }

    /// αL at the grid point nearest `frequency`.
    pub fn at(&self, frequency: f64) -> f64 {
        let i = self
            .frequency
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - frequency).abs().total_cmp(&(b.1 - frequency).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.alpha_l.get(i).copied().unwrap_or(0.0)
    }

    pub fn peak(&self) -> f64 {
        self.alpha_l.iter().copied().fold(0.0, f64::max)
    }
}

fn lorentzian(x: f64, hwhm: f64) -> f64 {
    hwhm / (PI * (x * x + hwhm * hwhm))
}

struct Line {
    center: f64,
    strength: f64,
}

/// Raw (unscaled) absorption at `nu` from per-ion line weights.
fn absorption(nu: f64, lines: &[Line], hwhm: f64) -> f64 {
    lines.iter().map(|l| l.strength * lorentzian(nu - l.center, hwhm)).sum()
}

fn ion_lines(ions: &[IonParams], pops: impl Fn(usize) -> (f64, f64), scheme: &LevelScheme) -> Vec<Line> {
    let offsets = scheme.line_offsets();
    let mut lines = Vec::with_capacity(ions.len() * 6);
    for (i, ion) in ions.iter().enumerate() {
        let base = ion.delta_opt / (2.0 * PI);
        let (p0, p1) = pops(i);
        for (off, s) in offsets.iter().zip(scheme.relative_strengths) {
            if p0 != 0.0 {
                lines.push(Line {
                    center: base + off,
                    strength: s * p0,
                });
            }
            if p1 != 0.0 {
                lines.push(Line {
                    center: base + off + scheme.qubit_splitting,
                    strength: s * p1,
                });
            }
        }
    }
    lines
}

/// Peak of the raw all-|0⟩ spectrum, searched on a fine grid around each line.
fn reference_peak(ions: &[IonParams], scheme: &LevelScheme, hwhm: f64) -> f64 {
    let lines = ion_lines(ions, |_| (1.0, 0.0), scheme);
    let spread = ions
        .iter()
        .map(|i| (i.delta_opt / (2.0 * PI)).abs())
        .fold(0.0, f64::max);
    let half_span = 3.0 * (spread + hwhm);
    let step = (spread + hwhm) / 50.0;
    let n = (2.0 * half_span / step).ceil() as usize;
    let candidates: Vec<f64> = scheme
        .line_offsets()
        .iter()
        .flat_map(|off| (0..=n).map(move |k| off - half_span + k as f64 * step))
        .collect();
    candidates
        .par_iter()
        .map(|&nu| absorption(nu, &lines, hwhm))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// αL(ν) = Σ_ions Σ_lines strength · population · L(ν − ν_line), with |0⟩
/// lines at δ_opt/2π + {0, Δ₁, Δ₁+Δ₂} and |1⟩ lines shifted by the qubit
/// splitting. Scaled so the same ions, all in |0⟩, peak at `alpha_l_max`.
pub fn render_spectrum(
    ions: &[IonParams],
    populations: &[[f64; 4]],
    scheme: &LevelScheme,
    settings: &SpectrumSettings,
) -> Result<SpectrumTrace> {
    if ions.is_empty() {
        return Err(darkgate::Error::Domain("spectrum of an empty ensemble".into()).into());
    }
    if ions.len() != populations.len() {
        return Err(
            darkgate::Error::Domain(format!("{} population sets for {} ions", populations.len(), ions.len())).into(),
        );
    }
    settings.validate()?;
    let hwhm = 0.5 * settings.homogeneous_width;
    let scale = settings.alpha_l_max / reference_peak(ions, scheme, hwhm);
    let zero = Level::Zero.index();
    let one = Level::One.index();
    let lines = ion_lines(ions, |i| (populations[i][zero], populations[i][one]), scheme);
    let frequency = settings.frequencies();
    let alpha_l = frequency
        .par_iter()
        .map(|&nu| (scale * absorption(nu, &lines, hwhm)).max(0.0))
        .collect();
    Ok(SpectrumTrace { frequency, alpha_l })
}
