//! |0⟩ → |e⟩ → |1⟩ population transfer with two single-color sechyp pulses.

use darkgate::tomography::mean_populations;
use darkgate::{
    initial_state, make_single_color, sample_ensemble, DensityMatrix, DriveColors, IonParams, Level, Propagator,
    PulseSequence, World,
};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::output::{num, OutputFile};
use crate::spectrum::{render_spectrum, SpectrumTrace};

pub fn transfer_sequence(world: &World) -> Result<PulseSequence> {
    let up = make_single_color(world.shape, DriveColors::OnlyZero, 0.0, 0.0);
    let down = make_single_color(world.shape, DriveColors::OnlyOne, 0.0, 0.0);
    Ok(PulseSequence::contiguous([up, down], world.gap)?)
}

/// Sampled ions and their states after the transfer.
pub fn simulate_transfer(world: &World) -> Result<(Vec<IonParams>, Vec<DensityMatrix>)> {
    world.validate()?;
    let ions = sample_ensemble(&world.ensemble)?;
    let prop = Propagator::new(&transfer_sequence(world)?, &world.scheme, &world.evolution)?;
    let start = vec![initial_state(); ions.len()];
    let finals = prop.evolve_ensemble(&start, &ions, &world.dissipator())?;
    Ok((ions, finals))
}

/// Mean |1⟩ population after the transfer.
pub fn transfer_efficiency(world: &World) -> Result<f64> {
    let (_, finals) = simulate_transfer(world)?;
    Ok(mean_populations(&finals)[Level::One.index()])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub efficiency: f64,
    /// Standard error of the ensemble mean.
    pub efficiency_sem: f64,
    /// Mean populations of (|0⟩, |1⟩, |aux⟩, |e⟩) after the transfer.
    pub populations: [f64; 4],
    pub n_ions: usize,
    pub seed: u64,
    pub alpha_l_at_zero_before: f64,
    pub alpha_l_at_zero_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    pub report: TransferReport,
    pub before: SpectrumTrace,
    pub after: SpectrumTrace,
}

pub fn run_transfer(cfg: &ScenarioConfig) -> Result<TransferOutcome> {
    let world = &cfg.world;
    let (ions, finals) = simulate_transfer(world)?;
    let populations = mean_populations(&finals);
    let p1: Vec<f64> = finals.iter().map(|r| r.population(Level::One)).collect();
    let n = p1.len() as f64;
    let var = p1.iter().map(|p| (p - populations[1]).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);

    let settings = &cfg.spectrum.settings;
    let mut ground = [0.0; 4];
    ground[Level::Zero.index()] = 1.0;
    let before = render_spectrum(&ions, &vec![ground; ions.len()], &world.scheme, settings)?;
    let after_pops: Vec<[f64; 4]> = finals.iter().map(|r| Level::ALL.map(|l| r.population(l))).collect();
    let after = render_spectrum(&ions, &after_pops, &world.scheme, settings)?;

    Ok(TransferOutcome {
        report: TransferReport {
            efficiency: populations[Level::One.index()],
            efficiency_sem: (var / n).sqrt(),
            populations,
            n_ions: ions.len(),
            seed: world.ensemble.rng_seed,
            alpha_l_at_zero_before: before.at(0.0),
            alpha_l_at_zero_after: after.at(0.0),
        },
        before,
        after,
    })
}

pub fn transfer_files(out: &TransferOutcome) -> Result<Vec<OutputFile>> {
    let rows = out
        .before
        .frequency
        .iter()
        .zip(&out.before.alpha_l)
        .zip(&out.after.alpha_l)
        .map(|((f, a), b)| vec![num(*f), num(*a), num(*b)]);
    Ok(vec![
        OutputFile::json("transfer.json", &out.report)?,
        OutputFile::csv(
            "transfer_spectrum.csv",
            &["frequency_hz", "alpha_l_before", "alpha_l_after"],
            rows,
        )?,
    ])
}
