//! Free induction decay of the qubit coherence after one two-color pulse.

use std::f64::consts::PI;

use darkgate::{
    free_evolve, initial_state, make_two_color, sample_ensemble, DensityMatrix, IonParams, Level, Propagator,
    PulseSequence, World,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::output::{num, OutputFile};

#[derive(Debug, Clone, PartialEq)]
pub struct FidTrace {
    /// Delay after the end of the preparation pulse (s).
    pub delay: Vec<f64>,
    /// |⟨ρ₀₁⟩(t)| / |⟨ρ₀₁⟩(0)|
    pub envelope: Vec<f64>,
    /// Re(⟨ρ₀₁⟩(t)·e^{i2πf_q t}) / |⟨ρ₀₁⟩(0)|
    pub beat: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceAt {
    pub delay_us: f64,
    pub remaining: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidReport {
    pub n_ions: usize,
    pub seed: u64,
    pub hf_sigma_hz: f64,
    pub coherence: Vec<CoherenceAt>,
    /// σ of a Gaussian envelope exp(−(2πσt)²/2) fitted to the trace (Hz).
    pub fitted_hf_sigma_hz: Option<f64>,
    pub beat_frequency_hz: Option<f64>,
}

/// Ions and their states right after a φ = 0 two-color pulse on |0⟩.
pub fn prepare_superposition(world: &World) -> Result<(Vec<IonParams>, Vec<DensityMatrix>)> {
    world.validate()?;
    let ions = sample_ensemble(&world.ensemble)?;
    let seq = PulseSequence::new(vec![make_two_color(world.shape, 0.0, 0.0, 0.0)], None)?;
    let prop = Propagator::new(&seq, &world.scheme, &world.evolution)?;
    let start = vec![initial_state(); ions.len()];
    let states = prop.evolve_ensemble(&start, &ions, &world.dissipator())?;
    Ok((ions, states))
}

fn mean_coherence(world: &World, ions: &[IonParams], states: &[DensityMatrix], delay: f64) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (rho, ion) in states.iter().zip(ions) {
        let later = free_evolve(rho, delay, ion, &world.decoherence)?;
        sum += later.element(Level::Zero, Level::One);
    }
    Ok(sum / states.len() as f64)
}

/// Normalized ensemble coherence at each delay.
pub fn coherence_fraction(world: &World, delays: &[f64]) -> Result<Vec<f64>> {
    let (ions, states) = prepare_superposition(world)?;
    let c0 = mean_coherence(world, &ions, &states, 0.0)?.norm();
    delays
        .iter()
        .map(|&d| Ok(mean_coherence(world, &ions, &states, d)?.norm() / c0))
        .collect()
}

pub fn fid_trace(world: &World, delays: &[f64]) -> Result<FidTrace> {
    let (ions, states) = prepare_superposition(world)?;
    let c0 = mean_coherence(world, &ions, &states, 0.0)?.norm();
    let beat_omega = 2.0 * PI * world.scheme.qubit_splitting;
    let values = delays
        .par_iter()
        .map(|&d| mean_coherence(world, &ions, &states, d))
        .collect::<Result<Vec<_>>>()?;
    let envelope = values.iter().map(|c| c.norm() / c0).collect();
    let beat = values
        .iter()
        .zip(delays)
        .map(|(c, &t)| (c * Complex64::from_polar(1.0, beat_omega * t)).re / c0)
        .collect();
    Ok(FidTrace {
        delay: delays.to_vec(),
        envelope,
        beat,
    })
}

/// Least-squares σ of exp(−(2πσt)²/2) through the points above `floor`.
pub fn fit_gaussian_sigma(delay: &[f64], envelope: &[f64], floor: f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &e) in delay.iter().zip(envelope) {
        if e > floor && t > 0.0 {
            let t2 = t * t;
            num += -e.ln() * t2;
            den += t2 * t2;
        }
    }
    (den > 0.0 && num > 0.0).then(|| (2.0 * num / den).sqrt() / (2.0 * PI))
}

/// Frequency from the zero crossings of `signal`, restricted to samples
/// where `envelope` exceeds `floor`.
pub fn beat_frequency(time: &[f64], signal: &[f64], envelope: &[f64], floor: f64) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..signal.len() {
        if envelope[i - 1] < floor || envelope[i] < floor {
            break;
        }
        let (a, b) = (signal[i - 1], signal[i]);
        if (a < 0.0) != (b < 0.0) && a != b {
            crossings.push(time[i - 1] + (time[i] - time[i - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some((crossings.len() - 1) as f64 / (2.0 * span))
}

pub fn grid(cfg: &ScenarioConfig) -> Vec<f64> {
    let f = &cfg.fid;
    let n = ((f.stop - f.start) / f.step).round() as usize;
    (0..=n).map(|i| f.start + i as f64 * f.step).collect()
}

pub fn run_fid(cfg: &ScenarioConfig) -> Result<(FidReport, FidTrace)> {
    let world = &cfg.world;
    let trace = fid_trace(world, &grid(cfg))?;
    let remaining = coherence_fraction(world, &cfg.fid.report_delays)?;
    let report = FidReport {
        n_ions: world.ensemble.n_ions,
        seed: world.ensemble.rng_seed,
        hf_sigma_hz: world.ensemble.hf_sigma,
        coherence: cfg
            .fid
            .report_delays
            .iter()
            .zip(remaining)
            .map(|(&d, r)| CoherenceAt {
                delay_us: d * 1e6,
                remaining: r,
            })
            .collect(),
        fitted_hf_sigma_hz: fit_gaussian_sigma(&trace.delay, &trace.envelope, 0.05),
        beat_frequency_hz: beat_frequency(&trace.delay, &trace.beat, &trace.envelope, 0.05),
    };
    Ok((report, trace))
}

pub fn fid_files(report: &FidReport, trace: &FidTrace) -> Result<Vec<OutputFile>> {
    let rows = trace
        .delay
        .iter()
        .zip(&trace.envelope)
        .zip(&trace.beat)
        .map(|((d, e), b)| vec![num(d * 1e6), num(*e), num(*b)]);
    Ok(vec![
        OutputFile::json("fid.json", report)?,
        OutputFile::csv("fid.csv", &["delay_us", "envelope", "beat_signal"], rows)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use darkgate::{DecoherenceSpec, EnsembleSpec};

    #[test]
    fn flat_envelope_without_broadening_or_decoherence() {
        let world = World {
            ensemble: EnsembleSpec::homogeneous(3),
            decoherence: DecoherenceSpec::none(),
            ..World::default()
        };
        let f = coherence_fraction(&world, &[0.0, 20e-6, 60e-6]).unwrap();
        for v in f {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_fit_recovers_sigma() {
        let sigma: f64 = 8e3;
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.3e-6).collect();
        let e: Vec<f64> = t
            .iter()
            .map(|t| (-(2.0 * PI * sigma * t).powi(2) / 2.0).exp())
            .collect();
        let fit = fit_gaussian_sigma(&t, &e, 0.05).unwrap();
        assert!((fit - sigma).abs() < 1e-6 * sigma);
    }

    #[test]
    fn beat_frequency_of_a_cosine() {
        let f = 10.2e6;
        let t: Vec<f64> = (0..4000).map(|i| i as f64 * 5e-9).collect();
        let s: Vec<f64> = t.iter().map(|t| (2.0 * PI * f * t + 0.3).cos()).collect();
        let env = vec![1.0; t.len()];
        let got = beat_frequency(&t, &s, &env, 0.05).unwrap();
        assert!((got - f).abs() < 1e-4 * f);
    }
}
