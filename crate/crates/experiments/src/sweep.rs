//! One- or two-parameter grids over the world.

use darkgate::{initial_state, projection_rotation, rotation_for_target, run_tomography, sample_ensemble, Axis, World};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ScenarioConfig, SweepParams};
use crate::error::Result;
use crate::output::{num, OutputFile};
use crate::transfer::transfer_efficiency;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub transfer_efficiency: Option<f64>,
    pub fidelity_qr_qst: Option<f64>,
    /// Mean ∫P_e dt over one preparation plus one projection gate (µs).
    pub dwell_qr_qst_us: f64,
    /// Mean ∫P_e dt of a single gate (µs).
    pub dwell_per_gate_us: f64,
    /// e^{−t_u/T2} with t_u the QR+QST dwell.
    pub exp_tu_over_t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameters: Vec<&'static str>,
    pub target: &'static str,
    pub n_ions: usize,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

/// Cartesian product of the axes, first axis slowest.
pub fn grid_points(sweep: &SweepParams) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in &sweep.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Dwell of the preparation gate and of prep + x projection, without tomography.
fn gate_dwell(world: &World, sweep: &SweepParams) -> Result<(f64, f64)> {
    let ions = sample_ensemble(&world.ensemble)?;
    let start = vec![initial_state(); ions.len()];
    let (prepared, d_prep) = world.apply_gate(rotation_for_target(sweep.target), &start, &ions)?;
    let (_, d_proj) = world.apply_gate(projection_rotation(Axis::X), &prepared, &ions)?;
    let n = ions.len() as f64;
    let prep = d_prep.iter().sum::<f64>() / n;
    let proj = d_proj.iter().sum::<f64>() / n;
    Ok((prep, prep + proj))
}

fn evaluate(base: &World, sweep: &SweepParams, values: &[f64]) -> Result<SweepPoint> {
    let mut world = base.clone();
    for (axis, &v) in sweep.axes.iter().zip(values) {
        axis.param.apply(&mut world, v);
    }
    world.validate()?;
    let transfer = sweep
        .metric
        .transfer()
        .then(|| transfer_efficiency(&world))
        .transpose()?;
    let (fidelity, per_gate, qr_qst) = if sweep.metric.tomography() {
        let rec = run_tomography(rotation_for_target(sweep.target), &world)?;
        (Some(rec.fidelity_qr_qst), rec.prep_dwell, rec.excited_dwell_qr_qst)
    } else {
        let (g, q) = gate_dwell(&world, sweep)?;
        (None, g, q)
    };
    Ok(SweepPoint {
        values: values.to_vec(),
        transfer_efficiency: transfer,
        fidelity_qr_qst: fidelity,
        dwell_qr_qst_us: qr_qst * 1e6,
        dwell_per_gate_us: per_gate * 1e6,
        exp_tu_over_t2: (-qr_qst / world.decoherence.t2_optical).exp(),
    })
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepReport> {
    let points = grid_points(&cfg.sweep)
        .par_iter()
        .map(|values| evaluate(&cfg.world, &cfg.sweep, values))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        parameters: cfg.sweep.axes.iter().map(|a| a.param.name()).collect(),
        target: cfg.sweep.target.key(),
        n_ions: cfg.world.ensemble.n_ions,
        seed: cfg.world.ensemble.rng_seed,
        points,
    })
}

pub fn sweep_files(report: &SweepReport) -> Result<Vec<OutputFile>> {
    let mut header: Vec<&str> = report.parameters.clone();
    header.extend([
        "transfer_efficiency",
        "fidelity_qr_qst",
        "dwell_per_gate_us",
        "dwell_qr_qst_us",
        "exp_tu_over_t2",
    ]);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows = report.points.iter().map(|p| {
        let mut row: Vec<String> = p.values.iter().map(|v| num(*v)).collect();
        row.extend([
            opt(p.transfer_efficiency),
            opt(p.fidelity_qr_qst),
            num(p.dwell_per_gate_us),
            num(p.dwell_qr_qst_us),
            num(p.exp_tu_over_t2),
        ]);
        row
    });
    Ok(vec![
        OutputFile::json("sweep.json", report)?,
        OutputFile::csv("sweep.csv", &header, rows)?,
    ])
}
