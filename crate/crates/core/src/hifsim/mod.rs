//! High-impedance fault simulation.
//!
//! The arc is a two-diode model: a positive branch conducting through `R_p`
//! once the phase voltage exceeds `V_p`, a negative branch conducting through
//! `R_n` once it drops below `−V_n`, and a dead band in between. Both sources
//! and both resistances are redrawn at random every update interval, and the
//! current grows in under a `1 − e^(−t/τ)` envelope.
//!
//! The feeder is a linear surrogate of a 13-bus radial distribution feeder;
//! see [`feeder`] for the channel map and sensitivity tables.

mod dataset;
pub mod feeder;
mod features;

use serde::{Deserialize, Serialize};

use crate::dataio::ClassCode;
use crate::error::{Error, Result};
use crate::numerics::RngState;

pub use dataset::{generate_dataset, DatasetConfig, ScenarioBlock};
pub use feeder::{simulate_feeder, WaveformSet, CHANNEL_COUNT};
pub use features::extract_features;

/// Arc model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArcParams {
    /// Nominal positive-branch source, volts.
    pub v_p: f64,
    /// Nominal negative-branch source, volts.
    pub v_n: f64,
    /// Sources are redrawn uniformly within `±variation_fraction` of nominal.
    pub variation_fraction: f64,
    /// Arc resistances are redrawn uniformly in `[r_lo, r_hi]` ohms.
    pub r_lo: f64,
    pub r_hi: f64,
    /// Seconds between redraws.
    pub update_interval: f64,
    /// Build-up time constant in seconds; 0 disables the envelope.
    pub build_up_time_constant: f64,
    pub system_frequency: f64,
}

impl Default for ArcParams {
    fn default() -> Self {
        ArcParams {
            v_p: 1000.0,
            v_n: 500.0,
            variation_fraction: 0.10,
            r_lo: 1000.0,
            r_hi: 1500.0,
            update_interval: 0.11e-3,
            build_up_time_constant: 0.05,
            system_frequency: 60.0,
        }
    }
}

impl ArcParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.v_p > self.v_n
            && self.v_n > 0.0
            && (0.0..1.0).contains(&self.variation_fraction)
            && self.r_lo > 0.0
            && self.r_lo <= self.r_hi
            && self.update_interval > 0.0
            && self.build_up_time_constant >= 0.0
            && self.system_frequency > 0.0
            && [self.v_p, self.r_hi, self.update_interval, self.build_up_time_constant, self.system_frequency]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid arc parameters: {self:?}")))
        }
    }

    /// Samples between parameter redraws: `⌈update_interval · sample_rate⌉`.
    pub fn hold_samples(&self, sample_rate: f64) -> usize {
        // the small slack keeps exact products like 0.0002·10000 from rounding up
        ((self.update_interval * sample_rate) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Which arc branches conduct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Conduction {
    #[default]
    BothHalves,
    /// Broken-conductor variant: positive half-cycles only.
    PositiveOnly,
}

/// Arc current for a sampled phase voltage, using [`Conduction::BothHalves`].
pub fn arc_current(
    params: &ArcParams,
    phase_voltage: &[f64],
    sample_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    arc_current_with(params, phase_voltage, sample_rate, seed, Conduction::BothHalves)
}

pub fn arc_current_with(
    params: &ArcParams,
    phase_voltage: &[f64],
    sample_rate: f64,
    seed: u64,
    conduction: Conduction,
) -> Result<Vec<f64>> {
    params.validate()?;
    if phase_voltage.is_empty() {
        return Err(Error::invalid("arc_current needs a non-empty voltage sequence"));
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
    }
    let hold = params.hold_samples(sample_rate);
    let mut rng = RngState::seeded(seed);
    let f = params.variation_fraction;
    let (mut vp, mut vn, mut rp, mut rn) = (params.v_p, params.v_n, params.r_lo, params.r_lo);
    let tau = params.build_up_time_constant;

    let mut out = Vec::with_capacity(phase_voltage.len());
    for (k, &v) in phase_voltage.iter().enumerate() {
        if k % hold == 0 {
            vp = params.v_p * (1.0 + rng.uniform(-f, f)?);
            vn = params.v_n * (1.0 + rng.uniform(-f, f)?);
            rp = rng.uniform(params.r_lo, params.r_hi)?;
            rn = rng.uniform(params.r_lo, params.r_hi)?;
        }
        let i = if v > vp {
            (v - vp) / rp
        } else if v < -vn && conduction == Conduction::BothHalves {
            (v + vn) / rn
        } else {
            0.0
        };
        let envelope = if tau > 0.0 {
            1.0 - (-(k as f64) / sample_rate / tau).exp()
        } else {
            1.0
        };
        out.push(i * envelope);
    }
    Ok(out)
}

/// Fault position on the feeder. `None` is normal operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FaultLocation {
    #[default]
    None,
    A,
    B,
    C,
}

impl FaultLocation {
    pub fn class_code(self) -> ClassCode {
        match self {
            FaultLocation::None => ClassCode::Normal,
            FaultLocation::A => ClassCode::FaultA,
            FaultLocation::B => ClassCode::FaultB,
            FaultLocation::C => ClassCode::FaultC,
        }
    }
}

/// One simulated operating condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArcScenario {
    pub arc: ArcParams,
    pub fault_location: FaultLocation,
    pub broken_conductor: bool,
    /// Load multiplier in `[0.5, 1.5]`.
    pub load_scale: f64,
    /// Capacitor bank switched in at this time, seconds.
    pub capacitor_switch_at: Option<f64>,
    pub duration: f64,
    /// Must be a whole multiple of the system frequency, at least 20×.
    pub sample_rate: f64,
    pub seed: u64,
    /// Standard deviation of the per-cycle relative load fluctuation.
    pub load_jitter: f64,
    /// Measurement noise standard deviation as a fraction of nominal peak.
    pub noise_fraction: f64,
}

impl Default for ArcScenario {
    fn default() -> Self {
        ArcScenario {
            arc: ArcParams::default(),
            fault_location: FaultLocation::None,
            broken_conductor: false,
            load_scale: 1.0,
            capacitor_switch_at: None,
            duration: 0.5,
            sample_rate: DEFAULT_SAMPLE_RATE,
            seed: 0,
            load_jitter: DEFAULT_LOAD_JITTER,
            noise_fraction: DEFAULT_NOISE_FRACTION,
        }
    }
}

pub const DEFAULT_SAMPLE_RATE: f64 = 12_000.0;
pub const DEFAULT_LOAD_JITTER: f64 = 0.05;
pub const DEFAULT_NOISE_FRACTION: f64 = 0.001;

impl ArcScenario {
    pub fn validate(&self) -> Result<()> {
        self.arc.validate()?;
        let f = self.arc.system_frequency;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.sample_rate >= 20.0 * f) || !self.sample_rate.is_finite() {
            return Err(Error::invalid(format!(
                "sample rate {} is below 20x the system frequency {f}",
                self.sample_rate
            )));
        }
        let spc = self.sample_rate / f;
        if (spc - spc.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "sample rate {} is not a whole multiple of {f} Hz",
                self.sample_rate
            )));
        }
        if !(0.5..=1.5).contains(&self.load_scale) {
            return Err(Error::invalid(format!(
                "load_scale must lie in [0.5, 1.5], got {}",
                self.load_scale
            )));
        }
        if !(self.load_jitter >= 0.0 && self.load_jitter < 0.5) {
            return Err(Error::invalid(format!("load_jitter must lie in [0, 0.5), got {}", self.load_jitter)));
        }
        if !(self.noise_fraction >= 0.0 && self.noise_fraction < 0.1) {
            return Err(Error::invalid(format!(
                "noise_fraction must lie in [0, 0.1), got {}",
                self.noise_fraction
            )));
        }
        if let Some(t) = self.capacitor_switch_at {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("capacitor switch time must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn samples_per_cycle(&self) -> usize {
        (self.sample_rate / self.arc.system_frequency).round() as usize
    }
}
