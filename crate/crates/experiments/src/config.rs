//! Scenario configuration: a shipped preset overlaid with a TOML file.
//!
//! Keys are grouped in dotted sections and carry their unit in the name,
//! e.g. `pulse.t_fwhm_us` or `ensemble.optical_width_khz`. Frequencies
//! given for Rabi rates and detunings are ordinary frequencies (ν, not ω).

use std::f64::consts::PI;
use std::path::PathBuf;

use darkgate::{calibrate_hf_sigma, Integrator, OpticalShape, TargetState, World};
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};
use crate::spectrum::SpectrumSettings;

pub const DEFAULT_PRESET: &str = "paper-2007";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Spectrum,
    Transfer,
    Tomography,
    Fid,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::Transfer => "transfer",
            Scenario::Tomography => "tomography",
            Scenario::Fid => "fid",
            Scenario::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumParams {
    pub settings: SpectrumSettings,
    /// Ensemble size for spectra, independent of `ensemble.n_ions`.
    pub n_ions: usize,
    /// Render the spectrum after preparing this state instead of |0⟩.
    pub prepare: Option<TargetState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyParams {
    pub targets: Vec<TargetState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidParams {
    /// Trace grid, all in seconds after the end of the preparation pulse.
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Delays at which the coherence fraction is reported.
    pub report_delays: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "omega_peak_mhz")]
    OmegaPeakMhz,
    #[serde(rename = "t2_optical_us")]
    T2OpticalUs,
    #[serde(rename = "hf_sigma_khz")]
    HfSigmaKhz,
    #[serde(rename = "optical_width_khz")]
    OpticalWidthKhz,
    #[serde(rename = "mu")]
    Mu,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::OmegaPeakMhz => "omega_peak_mhz",
            SweepParam::T2OpticalUs => "t2_optical_us",
            SweepParam::HfSigmaKhz => "hf_sigma_khz",
            SweepParam::OpticalWidthKhz => "optical_width_khz",
            SweepParam::Mu => "mu",
        }
    }

    pub fn apply(self, world: &mut World, value: f64) {
        match self {
            SweepParam::OmegaPeakMhz => world.shape.omega_peak = 2.0 * PI * value * 1e6,
            SweepParam::T2OpticalUs => world.decoherence.t2_optical = value * 1e-6,
            SweepParam::HfSigmaKhz => world.ensemble.hf_sigma = value * 1e3,
            SweepParam::OpticalWidthKhz => world.ensemble.optical_width = value * 1e3,
            SweepParam::Mu => world.shape.mu = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMetric {
    Transfer,
    Tomography,
    Both,
}

impl SweepMetric {
    pub fn transfer(self) -> bool {
        matches!(self, SweepMetric::Transfer | SweepMetric::Both)
    }

    pub fn tomography(self) -> bool {
        matches!(self, SweepMetric::Tomography | SweepMetric::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    /// One or two axes; the grid is their Cartesian product.
    pub axes: Vec<SweepAxis>,
    pub metric: SweepMetric,
    /// State prepared when the metric includes tomography.
    pub target: TargetState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub world: World,
    pub output_dir: PathBuf,
    pub repetitions: usize,
    pub spectrum: SpectrumParams,
    pub tomography: TomographyParams,
    pub fid: FidParams,
    pub sweep: SweepParams,
}

/// Hyperfine width that leaves 20 % of the qubit coherence after 35 µs.
pub fn calibrated_hf_sigma() -> f64 {
    calibrate_hf_sigma(0.2, 35e-6).expect("constant arguments lie in the domain")
}

impl ScenarioConfig {
    pub fn preset(name: &str, scenario: Scenario) -> Result<Self> {
        if name != DEFAULT_PRESET {
            return Err(ExperimentError::UnknownPreset(name.to_string()));
        }
        let mut world = World::default();
        world.ensemble.hf_sigma = calibrated_hf_sigma();
        Ok(ScenarioConfig {
            scenario,
            world,
            output_dir: PathBuf::from("out"),
            repetitions: 5,
            spectrum: SpectrumParams {
                settings: SpectrumSettings::default(),
                n_ions: 10_000,
                prepare: None,
            },
            tomography: TomographyParams {
                targets: vec![
                    TargetState::Zero,
                    TargetState::One,
                    TargetState::Plus,
                    TargetState::Minus,
                    TargetState::PlusI,
                    TargetState::MinusI,
                ],
            },
            fid: FidParams {
                start: 0.0,
                stop: 60e-6,
                step: 5e-9,
                report_delays: vec![35e-6],
            },
            sweep: SweepParams {
                axes: vec![SweepAxis {
                    param: SweepParam::OmegaPeakMhz,
                    values: vec![0.2, 0.5, 1.0, 1.5, 2.0],
                }],
                metric: SweepMetric::Transfer,
                target: TargetState::Plus,
            },
        })
    }

    /// Preset `name` overlaid with the TOML document `text`. A `preset` key
    /// in the document overrides `name`.
    pub fn from_toml(text: &str, name: &str, scenario: Scenario) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut cfg = Self::preset(raw.preset.as_deref().unwrap_or(name), scenario)?;
        raw.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if self.repetitions == 0 {
            return Err(ExperimentError::config("repetitions", "must be ≥ 1"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(ExperimentError::config("output_dir", "must not be empty"));
        }
        self.spectrum.settings.validate()?;
        if self.spectrum.n_ions == 0 {
            return Err(ExperimentError::config("spectrum.n_ions", "must be ≥ 1"));
        }
        if self.tomography.targets.is_empty() {
            return Err(ExperimentError::config(
                "tomography.targets",
                "must list at least one state",
            ));
        }
        let f = &self.fid;
        if !(f.step > 0.0) || !(f.stop > f.start) || f.start < 0.0 {
            return Err(ExperimentError::config(
                "fid",
                "need 0 ≤ start_us < stop_us and step_ns > 0",
            ));
        }
        if (f.stop - f.start) / f.step > 1e7 {
            return Err(ExperimentError::config("fid.step_ns", "trace would exceed 10⁷ points"));
        }
        if f.report_delays.iter().any(|d| !(*d >= 0.0)) {
            return Err(ExperimentError::config("fid.report_delays_us", "delays must be ≥ 0"));
        }
        let s = &self.sweep;
        if s.axes.is_empty() || s.axes.len() > 2 {
            return Err(ExperimentError::config("sweep", "sweep one or two parameters"));
        }
        if s.axes.len() == 2 && s.axes[0].param == s.axes[1].param {
            return Err(ExperimentError::config(
                "sweep.parameter2",
                "must differ from sweep.parameter",
            ));
        }
        for (i, axis) in s.axes.iter().enumerate() {
            let key = if i == 0 { "sweep.values" } else { "sweep.values2" };
            if axis.values.is_empty() || axis.values.iter().any(|v| !v.is_finite()) {
                return Err(ExperimentError::config(key, "need at least one finite value"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    output_dir: Option<PathBuf>,
    repetitions: Option<usize>,
    #[serde(default)]
    ensemble: RawEnsemble,
    #[serde(default)]
    levels: RawLevels,
    #[serde(default)]
    decoherence: RawDecoherence,
    #[serde(default)]
    pulse: RawPulse,
    #[serde(default)]
    evolution: RawEvolution,
    #[serde(default)]
    spectrum: RawSpectrum,
    #[serde(default)]
    tomography: RawTomography,
    #[serde(default)]
    fid: RawFid,
    #[serde(default)]
    sweep: RawSweep,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    n_ions: Option<usize>,
    optical_width_khz: Option<f64>,
    optical_shape: Option<OpticalShape>,
    hf_sigma_khz: Option<f64>,
    rabi_rel_spread: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    qubit_splitting_mhz: Option<f64>,
    aux_offset_mhz: Option<f64>,
    excited_splittings_mhz: Option<[f64; 2]>,
    relative_strengths: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecoherence {
    t1_excited_us: Option<f64>,
    t2_optical_us: Option<f64>,
    branching: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    omega_peak_mhz: Option<f64>,
    t_fwhm_us: Option<f64>,
    t_total_us: Option<f64>,
    mu: Option<f64>,
    carrier_offset_khz: Option<f64>,
    gap_us: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    dt_max_ns: Option<f64>,
    integrator: Option<Integrator>,
    include_cross_coupling: Option<bool>,
    rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    n_ions: Option<usize>,
    start_mhz: Option<f64>,
    stop_mhz: Option<f64>,
    points: Option<usize>,
    homogeneous_width_khz: Option<f64>,
    alpha_l_max: Option<f64>,
    prepare: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTomography {
    targets: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFid {
    start_us: Option<f64>,
    stop_us: Option<f64>,
    step_ns: Option<f64>,
    report_delays_us: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Option<SweepParam>,
    values: Option<Vec<f64>>,
    parameter2: Option<SweepParam>,
    values2: Option<Vec<f64>>,
    metric: Option<SweepMetric>,
    target: Option<String>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn scaled(slot: &mut f64, value: Option<f64>, factor: f64) {
    if let Some(v) = value {
        *slot = v * factor;
    }
}

fn target(key: &str, s: &str) -> Result<TargetState> {
    TargetState::parse(s).map_err(|_| ExperimentError::config(key, format!("unknown state `{s}`")))
}

impl RawConfig {
    fn apply(self, cfg: &mut ScenarioConfig) -> Result<()> {
        set(&mut cfg.output_dir, self.output_dir);
        set(&mut cfg.repetitions, self.repetitions);

        let w = &mut cfg.world;
        let e = self.ensemble;
        set(&mut w.ensemble.n_ions, e.n_ions);
        scaled(&mut w.ensemble.optical_width, e.optical_width_khz, 1e3);
        set(&mut w.ensemble.optical_shape, e.optical_shape);
        scaled(&mut w.ensemble.hf_sigma, e.hf_sigma_khz, 1e3);
        set(&mut w.ensemble.rabi_rel_spread, e.rabi_rel_spread);
        set(&mut w.ensemble.rng_seed, e.seed);

        let l = self.levels;
        scaled(&mut w.scheme.qubit_splitting, l.qubit_splitting_mhz, 1e6);
        scaled(&mut w.scheme.aux_offset, l.aux_offset_mhz, 1e6);
        set(
            &mut w.scheme.excited_splittings,
            l.excited_splittings_mhz.map(|s| s.map(|v| v * 1e6)),
        );
        set(&mut w.scheme.relative_strengths, l.relative_strengths);

        let d = self.decoherence;
        scaled(&mut w.decoherence.t1_excited, d.t1_excited_us, 1e-6);
        scaled(&mut w.decoherence.t2_optical, d.t2_optical_us, 1e-6);
        set(&mut w.decoherence.branching, d.branching);

        let p = self.pulse;
        scaled(&mut w.shape.omega_peak, p.omega_peak_mhz, 2.0 * PI * 1e6);
        scaled(&mut w.shape.t_fwhm, p.t_fwhm_us, 1e-6);
        scaled(&mut w.shape.t_total, p.t_total_us, 1e-6);
        set(&mut w.shape.mu, p.mu);
        scaled(&mut w.shape.carrier_offset, p.carrier_offset_khz, 2.0 * PI * 1e3);
        scaled(&mut w.gap, p.gap_us, 1e-6);

        let v = self.evolution;
        scaled(&mut w.evolution.dt_max, v.dt_max_ns, 1e-9);
        set(&mut w.evolution.integrator, v.integrator);
        set(&mut w.evolution.include_cross_coupling, v.include_cross_coupling);
        set(&mut w.evolution.rel_tol, v.rel_tol);

        let s = self.spectrum;
        let st = &mut cfg.spectrum.settings;
        scaled(&mut st.start, s.start_mhz, 1e6);
        scaled(&mut st.stop, s.stop_mhz, 1e6);
        set(&mut st.points, s.points);
        scaled(&mut st.homogeneous_width, s.homogeneous_width_khz, 1e3);
        set(&mut st.alpha_l_max, s.alpha_l_max);
        set(&mut cfg.spectrum.n_ions, s.n_ions);
        if let Some(p) = s.prepare {
            cfg.spectrum.prepare = Some(target("spectrum.prepare", &p)?);
        }

        if let Some(list) = self.tomography.targets {
            cfg.tomography.targets = list
                .iter()
                .map(|s| target("tomography.targets", s))
                .collect::<Result<_>>()?;
        }

        let f = self.fid;
        scaled(&mut cfg.fid.start, f.start_us, 1e-6);
        scaled(&mut cfg.fid.stop, f.stop_us, 1e-6);
        scaled(&mut cfg.fid.step, f.step_ns, 1e-9);
        set(
            &mut cfg.fid.report_delays,
            f.report_delays_us.map(|v| v.into_iter().map(|d| d * 1e-6).collect()),
        );

        let sw = self.sweep;
        let sweep = &mut cfg.sweep;
        if let Some(param) = sw.parameter {
            sweep.axes[0].param = param;
        }
        set(&mut sweep.axes[0].values, sw.values);
        match (sw.parameter2, sw.values2) {
            (Some(param), Some(values)) => sweep.axes.push(SweepAxis { param, values }),
            (None, None) => {}
            _ => {
                return Err(ExperimentError::config(
                    "sweep.parameter2",
                    "parameter2 and values2 must be given together",
                ))
            }
        }
        set(&mut sweep.metric, sw.metric);
        if let Some(t) = sw.target {
            sweep.target = target("sweep.target", &t)?;
        }
        Ok(())
    }
}
