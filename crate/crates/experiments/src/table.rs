//! Fidelity table over the cardinal states, with repetition statistics.

use darkgate::{rotation_for_target, run_tomography, TargetState, TomographyRecord, World};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::output::{num, OutputFile};

/// A published value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub value: f64,
    pub uncertainty: f64,
}

const fn r(value: f64, uncertainty: f64) -> Option<Reference> {
    Some(Reference { value, uncertainty })
}

/// Measured (F_QR, F_QR+QST) for each state.
pub fn measured(target: TargetState) -> (Option<Reference>, Option<Reference>) {
    match target {
        TargetState::Zero => (None, r(1.02, 0.02)),
        TargetState::One => (r(0.96, 0.02), r(0.92, 0.03)),
        TargetState::Plus => (r(0.93, 0.01), r(0.87, 0.01)),
        TargetState::Minus => (r(0.93, 0.01), r(0.87, 0.02)),
        TargetState::PlusI => (r(0.92, 0.02), r(0.85, 0.04)),
        TargetState::MinusI => (r(0.91, 0.02), r(0.84, 0.04)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over repetitions (0 for a single one).
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

/// Simulation against measurement for one fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub measured: Reference,
    /// simulated − measured
    pub gap: f64,
    /// Gap in units of the measurement uncertainty.
    pub gap_sigma: f64,
    /// Simulated infidelity over measured infidelity: how much the
    /// measurement suppresses errors relative to the model.
    pub implied_suppression: Option<f64>,
}

fn compare(sim: f64, measured: Option<Reference>) -> Option<Comparison> {
    measured.map(|m| {
        let gap = sim - m.value;
        Comparison {
            measured: m,
            gap,
            gap_sigma: gap / m.uncertainty,
            implied_suppression: (m.value < 1.0).then(|| (1.0 - sim) / (1.0 - m.value)),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub state: &'static str,
    pub key: &'static str,
    pub fidelity_qr_qst: Stat,
    pub fidelity_qr: Stat,
    pub x: Stat,
    pub y: Stat,
    pub z: Stat,
    pub excited_dwell_qr_qst_us: Stat,
    pub qr_qst_vs_measured: Option<Comparison>,
    pub qr_vs_measured: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub n_ions: usize,
    pub repetitions: usize,
    pub seeds: Vec<u64>,
    pub hf_sigma_hz: f64,
    pub t2_optical_s: f64,
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn row(&self, target: TargetState) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.key == target.key())
    }
}

/// Seed of repetition `rep`.
pub fn repetition_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

pub fn tomography_row(target: TargetState, records: &[TomographyRecord]) -> TableRow {
    let stat = |f: &dyn Fn(&TomographyRecord) -> f64| Stat::of(&records.iter().map(f).collect::<Vec<_>>());
    let fidelity_qr_qst = stat(&|r| r.fidelity_qr_qst);
    let fidelity_qr = stat(&|r| r.fidelity_qr);
    let (m_qr, m_qr_qst) = measured(target);
    TableRow {
        state: target.label(),
        key: target.key(),
        fidelity_qr_qst,
        fidelity_qr,
        x: stat(&|r| r.expectations.x),
        y: stat(&|r| r.expectations.y),
        z: stat(&|r| r.expectations.z),
        excited_dwell_qr_qst_us: stat(&|r| r.excited_dwell_qr_qst * 1e6),
        qr_qst_vs_measured: compare(fidelity_qr_qst.mean, m_qr_qst),
        qr_vs_measured: compare(fidelity_qr.mean, m_qr),
    }
}

/// Runs every configured target `repetitions` times with consecutive seeds.
pub fn run_tomography_suite(cfg: &ScenarioConfig) -> Result<(TableReport, Vec<TomographyRecord>)> {
    let seeds: Vec<u64> = (0..cfg.repetitions)
        .map(|r| repetition_seed(cfg.world.ensemble.rng_seed, r))
        .collect();
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &target in &cfg.tomography.targets {
        let prep = rotation_for_target(target);
        let records = seeds
            .iter()
            .map(|&seed| {
                let mut world: World = cfg.world.clone();
                world.ensemble.rng_seed = seed;
                run_tomography(prep, &world)
            })
            .collect::<darkgate::Result<Vec<_>>>()?;
        rows.push(tomography_row(target, &records));
        all.extend(records);
    }
    let report = TableReport {
        n_ions: cfg.world.ensemble.n_ions,
        repetitions: cfg.repetitions,
        seeds,
        hf_sigma_hz: cfg.world.ensemble.hf_sigma,
        t2_optical_s: cfg.world.decoherence.t2_optical,
        rows,
    };
    Ok((report, all))
}

pub fn table_files(report: &TableReport, records: &[TomographyRecord]) -> Result<Vec<OutputFile>> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows = report.rows.iter().map(|r| {
        vec![
            r.key.to_string(),
            num(r.fidelity_qr.mean),
            num(r.fidelity_qr.std),
            num(r.fidelity_qr_qst.mean),
            num(r.fidelity_qr_qst.std),
            opt(r.qr_vs_measured.map(|c| c.measured.value)),
            opt(r.qr_qst_vs_measured.map(|c| c.measured.value)),
            opt(r.qr_qst_vs_measured.map(|c| c.gap)),
            num(r.excited_dwell_qr_qst_us.mean),
        ]
    });
    let header = [
        "state",
        "f_qr_mean",
        "f_qr_std",
        "f_qr_qst_mean",
        "f_qr_qst_std",
        "f_qr_measured",
        "f_qr_qst_measured",
        "f_qr_qst_gap",
        "excited_dwell_us",
    ];
    Ok(vec![
        OutputFile::json("table.json", report)?,
        OutputFile::csv("table.csv", &header, rows)?,
        OutputFile::json("records.json", &records)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Scenario, DEFAULT_PRESET};
    use darkgate::RotationSpec;

    #[test]
    fn stat_of_values() {
        let s = Stat::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
        assert_eq!(Stat::of(&[0.5]).std, 0.0);
    }

    #[test]
    fn comparison_quantifies_gap() {
        let c = compare(0.80, measured(TargetState::Plus).1).unwrap();
        assert!((c.gap + 0.07).abs() < 1e-12);
        assert!((c.gap_sigma + 7.0).abs() < 1e-9);
        assert!((c.implied_suppression.unwrap() - 0.2 / 0.13).abs() < 1e-12);
        assert!(compare(1.0, measured(TargetState::Zero).1)
            .unwrap()
            .implied_suppression
            .is_none());
    }

    #[test]
    fn ideal_world_rows_are_unity() {
        let mut cfg = ScenarioConfig::preset(DEFAULT_PRESET, Scenario::Tomography).unwrap();
        cfg.world = World::ideal(1);
        cfg.repetitions = 2;
        cfg.tomography.targets = vec![TargetState::Zero, TargetState::MinusI];
        let (report, records) = run_tomography_suite(&cfg).unwrap();
        assert_eq!(records.len(), 4);
        for row in &report.rows {
            assert!((row.fidelity_qr_qst.mean - 1.0).abs() <= 0.005, "{}", row.state);
            assert!((row.fidelity_qr.mean - 1.0).abs() <= 0.005, "{}", row.state);
        }
    }

    #[test]
    fn zero_row_is_identity_gate_tomography() {
        let mut cfg = ScenarioConfig::preset(DEFAULT_PRESET, Scenario::Tomography).unwrap();
        cfg.world.ensemble.n_ions = 6;
        cfg.repetitions = 1;
        cfg.tomography.targets = vec![TargetState::Zero];
        let (report, _) = run_tomography_suite(&cfg).unwrap();
        let direct = run_tomography(RotationSpec::IDENTITY, &cfg.world).unwrap();
        assert_eq!(report.rows[0].fidelity_qr_qst.mean, direct.fidelity_qr_qst);
    }
}
