//! Experiment scenarios for the darkgate simulator: absorption spectra,
//! population transfer, state tomography, free induction decay and
//! parameter sweeps. Each scenario renders its results to in-memory files.

pub mod config;
pub mod error;
pub mod fid;
pub mod output;
pub mod spectrum;
pub mod sweep;
pub mod table;
pub mod transfer;

use darkgate::{initial_state, rotation_for_target, sample_ensemble, Level};
use serde::Serialize;

pub use config::{Scenario, ScenarioConfig, DEFAULT_PRESET};
pub use error::{ExperimentError, Result};
pub use output::{write_all, OutputFile};

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    n_ions: usize,
    seed: u64,
    prepared: Option<&'static str>,
    peak_alpha_l: f64,
    alpha_l_at_zero: f64,
    integrated_alpha_l_hz: f64,
}

fn spectrum_scenario(cfg: &ScenarioConfig) -> Result<Vec<OutputFile>> {
    let mut world = cfg.world.clone();
    world.ensemble.n_ions = cfg.spectrum.n_ions;
    world.validate()?;
    let ions = sample_ensemble(&world.ensemble)?;
    let populations: Vec<[f64; 4]> = match cfg.spectrum.prepare {
        None => {
            let mut p = [0.0; 4];
            p[Level::Zero.index()] = 1.0;
            vec![p; ions.len()]
        }
        Some(target) => {
            let start = vec![initial_state(); ions.len()];
            let (states, _) = world.apply_gate(rotation_for_target(target), &start, &ions)?;
            states.iter().map(|r| Level::ALL.map(|l| r.population(l))).collect()
        }
    };
    let trace = spectrum::render_spectrum(&ions, &populations, &world.scheme, &cfg.spectrum.settings)?;
    let summary = SpectrumSummary {
        n_ions: ions.len(),
        seed: world.ensemble.rng_seed,
        prepared: cfg.spectrum.prepare.map(|t| t.key()),
        peak_alpha_l: trace.peak(),
        alpha_l_at_zero: trace.at(0.0),
        integrated_alpha_l_hz: trace.integrated(),
    };
    let rows = trace
        .frequency
        .iter()
        .zip(&trace.alpha_l)
        .map(|(f, a)| vec![output::num(*f), output::num(*a)]);
    Ok(vec![
        OutputFile::json("spectrum.json", &summary)?,
        OutputFile::csv("spectrum.csv", &["frequency_hz", "alpha_l"], rows)?,
    ])
}

/// Runs the configured scenario and returns its output files.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<OutputFile>> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Spectrum => spectrum_scenario(cfg),
        Scenario::Transfer => transfer::transfer_files(&transfer::run_transfer(cfg)?),
        Scenario::Tomography => {
            let (report, records) = table::run_tomography_suite(cfg)?;
            table::table_files(&report, &records)
        }
        Scenario::Fid => {
            let (report, trace) = fid::run_fid(cfg)?;
            fid::fid_files(&report, &trace)
        }
        Scenario::Sweep => sweep::sweep_files(&sweep::run_sweep(cfg)?),
    }
}
