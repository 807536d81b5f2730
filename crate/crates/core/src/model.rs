//! Level scheme, decoherence parameters and the inhomogeneous ion ensemble.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperfine structure of the optical transition, all frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    /// Ground-state |0⟩–|1⟩ hyperfine splitting.
    pub qubit_splitting: f64,
    /// Position of |aux⟩ relative to |0⟩.
    pub aux_offset: f64,
    /// The two upper-state hyperfine gaps, lowest line first.
    pub excited_splittings: [f64; 2],
    /// Relative strength of each of the three resolved optical lines
    /// (one per excited hyperfine level), shared by |0⟩ and |1⟩.
    pub relative_strengths: [f64; 3],
}

impl Default for LevelScheme {
    fn default() -> Self {
        LevelScheme {
            qubit_splitting: 10.2e6,
            aux_offset: 27.5e6,
            excited_splittings: [4.6e6, 4.8e6],
            relative_strengths: [1.0, 0.6, 0.35],
        }
    }
}

impl LevelScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.qubit_splitting > 0.0) {
            return Err(Error::config("qubit_splitting", "must be > 0"));
        }
        if !self.excited_splittings.iter().all(|&s| s > 0.0) {
            return Err(Error::config("excited_splittings", "must both be > 0"));
        }
        if !self.relative_strengths.iter().all(|&s| s > 0.0 && s <= 1.0) {
            return Err(Error::config("relative_strengths", "must lie in (0, 1]"));
        }
        if !self.aux_offset.is_finite() {
            return Err(Error::config("aux_offset", "must be finite"));
        }
        Ok(())
    }

    /// Offsets (Hz) of the three optical lines out of one ground level,
    /// relative to its lowest line.
    pub fn line_offsets(&self) -> [f64; 3] {
        let [a, b] = self.excited_splittings;
        [0.0, a, a + b]
    }
}

/// Excited-state relaxation. Times in seconds; `f64::INFINITY` disables a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSpec {
    pub t1_excited: f64,
    pub t2_optical: f64,
    /// Decay probabilities from |e⟩ into |0⟩, |1⟩, |aux⟩.
    pub branching: [f64; 3],
}

impl Default for DecoherenceSpec {
    fn default() -> Self {
        DecoherenceSpec {
            t1_excited: 164e-6,
            t2_optical: 50e-6,
            branching: [0.45, 0.45, 0.10],
        }
    }
}

impl DecoherenceSpec {
    /// No decay and no dephasing.
    pub fn none() -> Self {
        DecoherenceSpec {
            t1_excited: f64::INFINITY,
            t2_optical: f64::INFINITY,
            branching: [0.45, 0.45, 0.10],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1_excited > 0.0) {
            return Err(Error::config("t1_excited", "must be > 0"));
        }
        if !(self.t2_optical > 0.0) {
            return Err(Error::config("t2_optical", "must be > 0"));
        }
        if self.branching.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(Error::config("branching", "each entry must lie in [0, 1]"));
        }
        let sum: f64 = self.branching.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config("branching", format!("sums to {sum}, expected 1")));
        }
        if self.t2_optical > 2.0 * self.t1_excited {
            return Err(Error::config("t2_optical", "must not exceed 2·t1_excited"));
        }
        Ok(())
    }

    /// Population decay rate of |e⟩ (1/s).
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.t1_excited
    }

    /// Pure dephasing rate γ_φ = 1/T2 − 1/(2T1) of the optical coherences.
    pub fn pure_dephasing_rate(&self) -> f64 {
        (1.0 / self.t2_optical - 0.5 / self.t1_excited).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpticalShape {
    Gaussian,
    LorentzianTruncated,
}

/// Truncation of the Lorentzian optical profile, in units of its FWHM on each side.
pub const LORENTZIAN_TRUNCATION: f64 = 5.0;

/// Statistics of the inhomogeneous ensemble. Frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_ions: usize,
    /// FWHM of the optical detuning distribution.
    pub optical_width: f64,
    pub optical_shape: OpticalShape,
    /// Standard deviation of the Gaussian hyperfine splitting shift.
    pub hf_sigma: f64,
    /// Half-width of the uniform Rabi scale distribution around 1.
    pub rabi_rel_spread: f64,
    pub rng_seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n_ions: 2000,
            optical_width: 170e3,
            optical_shape: OpticalShape::Gaussian,
            hf_sigma: 0.0,
            rabi_rel_spread: 0.15,
            rng_seed: 2007,
        }
    }
}

impl EnsembleSpec {
    /// Every ion identical and on resonance.
    pub fn homogeneous(n_ions: usize) -> Self {
        EnsembleSpec {
            n_ions,
            optical_width: 0.0,
            optical_shape: OpticalShape::Gaussian,
            hf_sigma: 0.0,
            rabi_rel_spread: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 1 {
            return Err(Error::config("n_ions", "must be ≥ 1"));
        }
        if !(self.optical_width >= 0.0) || !self.optical_width.is_finite() {
            return Err(Error::config("optical_width", "must be finite and ≥ 0"));
        }
        if !(self.hf_sigma >= 0.0) || !self.hf_sigma.is_finite() {
            return Err(Error::config("hf_sigma", "must be finite and ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.rabi_rel_spread) {
            return Err(Error::config("rabi_rel_spread", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Static parameters of one ion. Detunings in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonParams {
    /// Detuning of the ion's |0⟩–|e⟩ line from the ω₀ carrier.
    pub delta_opt: f64,
    /// Shift of the ion's |0⟩–|1⟩ splitting from nominal.
    pub delta_hf: f64,
    /// Factor multiplying every drive amplitude.
    pub rabi_scale: f64,
}

impl IonParams {
    pub const IDEAL: IonParams = IonParams {
        delta_opt: 0.0,
        delta_hf: 0.0,
        rabi_scale: 1.0,
    };
}

impl Default for IonParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// FWHM of a Gaussian in units of its standard deviation, 2√(2 ln 2).
pub fn gaussian_fwhm_factor() -> f64 {
    2.0 * (2.0 * LN_2).sqrt()
}

/// Draws `spec.n_ions` ions. Output depends only on `spec`.
pub fn sample_ensemble(spec: &EnsembleSpec) -> Result<Vec<IonParams>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let two_pi = 2.0 * PI;
    let opt_sigma = spec.optical_width / gaussian_fwhm_factor();
    let lorentz_hwhm = 0.5 * spec.optical_width;
    let lorentz_arg_max = (LORENTZIAN_TRUNCATION * 2.0).atan();

    let ions = (0..spec.n_ions)
        .map(|_| {
            // Fixed draw order per ion: optical, hyperfine, Rabi.
            let opt_hz = match spec.optical_shape {
                OpticalShape::Gaussian => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    opt_sigma * z
                }
                OpticalShape::LorentzianTruncated => {
                    // Inverse CDF of a Lorentzian restricted to ±LORENTZIAN_TRUNCATION·FWHM.
                    let u: f64 = rng.random_range(-1.0..1.0);
                    lorentz_hwhm * (u * lorentz_arg_max).tan()
                }
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            let hf_hz = spec.hf_sigma * z;
            let u: f64 = rng.random_range(-1.0..=1.0);
            IonParams {
                delta_opt: two_pi * opt_hz,
                delta_hf: two_pi * hf_hz,
                rabi_scale: 1.0 + spec.rabi_rel_spread * u,
            }
        })
        .collect();
    Ok(ions)
}

/// Hyperfine standard deviation σ (Hz) for which the Gaussian ensemble
/// free-induction envelope exp(−(2πσ)²t²/2) falls to `target_remaining`
/// at `at_time`.
pub fn calibrate_hf_sigma(target_remaining: f64, at_time: f64) -> Result<f64> {
    if !(target_remaining > 0.0 && target_remaining < 1.0) {
        return Err(Error::Domain(format!(
            "target_remaining must lie in (0, 1), got {target_remaining}"
        )));
    }
    if !(at_time > 0.0) || !at_time.is_finite() {
        return Err(Error::Domain(format!("at_time must be > 0, got {at_time}")));
    }
    Ok((2.0 * (1.0 / target_remaining).ln()).sqrt() / (2.0 * PI * at_time))
}
