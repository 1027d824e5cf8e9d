//! Linear surrogate of a 13-bus radial distribution feeder.
//!
//! Bus 650 is the substation source and is not measured. The remaining buses
//! contribute one channel per energized phase, 29 in all:
//!
//! | bus | phases | base kV (L-L) |
//! |-----|--------|---------------|
//! | 632 | a b c  | 4.16 |
//! | 633 | a b c  | 4.16 |
//! | 634 | a b c  | 0.48 (secondary of the in-line transformer) |
//! | 645 | b c    | 4.16 |
//! | 646 | b c    | 4.16 |
//! | 671 | a b c  | 4.16 |
//! | 680 | a b c  | 4.16 |
//! | 684 | a c    | 4.16 |
//! | 611 | c      | 4.16 |
//! | 652 | a      | 4.16 |
//! | 692 | a b c  | 4.16 |
//! | 675 | a b c  | 4.16 |
//!
//! Channel `j` carries `V_j·(1+s)·(1 − δ·(λ_φ − 1)·d_j/d_max)·sin(ωt + θ_j)`,
//! where `V_j, θ_j` are the base-case magnitude and angle, `s` is a slow
//! source-voltage wander, `λ_φ` the per-cycle load multiplier of the channel's
//! phase and `d_j` the feeder distance from the substation. A capacitor bank
//! at 675 raises voltages in proportion to the path shared with 675 and rings
//! briefly when it closes.
//!
//! A fault at location `L` (bus `b_L`, phase `φ_L`) drives the arc model with
//! the local phase voltage and lowers every same-phase channel by
//! `κ · shared(b_L, b_j) · i_arc(t)` volts, where `shared` is the length of the
//! feeder path common to both buses (the radial-network transfer impedance)
//! and `κ` is [`SAG_OHMS_PER_FOOT`]. Each sample also receives Gaussian
//! measurement noise.

use serde::{Deserialize, Serialize};

use super::{arc_current_with, ArcScenario, Conduction, FaultLocation};
use crate::dataio::ClassCode;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, RngState};

pub const CHANNEL_COUNT: usize = 29;

/// Sag per ampere of arc current per foot of shared feeder path.
pub const SAG_OHMS_PER_FOOT: f64 = 0.025;
/// Relative voltage drop at the far end of the feeder for a 100% load swing.
pub const LOAD_DROP_FRACTION: f64 = 0.03;
/// Standard deviation of the per-cycle source-voltage wander at the default
/// load jitter; it scales with the scenario's jitter.
pub const SOURCE_WANDER: f64 = 0.001;
/// Steady-state relative rise at bus 675 once the capacitor is in service.
pub const CAPACITOR_RISE: f64 = 0.005;
/// Capacitor inrush ringing: relative amplitude, frequency (Hz), decay (s).
/// The amplitude is that of a stiff source, where the switching cycle moves
/// the RMS about as much as one cycle of load fluctuation.
pub const CAPACITOR_RING: (f64, f64, f64) = (0.03, 420.0, 0.003);
/// Cycle-to-cycle correlation of the load and source processes.
const LOAD_CORRELATION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    A,
    B,
    C,
}

impl Phase {
    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bus {
    B632,
    B633,
    B634,
    B645,
    B646,
    B671,
    B680,
    B684,
    B611,
    B652,
    B692,
    B675,
}

impl Bus {
    fn name(self) -> &'static str {
        match self {
            Bus::B632 => "632",
            Bus::B633 => "633",
            Bus::B634 => "634",
            Bus::B645 => "645",
            Bus::B646 => "646",
            Bus::B671 => "671",
            Bus::B680 => "680",
            Bus::B684 => "684",
            Bus::B611 => "611",
            Bus::B652 => "652",
            Bus::B692 => "692",
            Bus::B675 => "675",
        }
    }

    /// Upstream bus (None for 632, which hangs off the substation) and the
    /// length in feet of the segment to it.
    fn parent(self) -> (Option<Bus>, f64) {
        match self {
            Bus::B632 => (None, 2000.0),
            Bus::B633 => (Some(Bus::B632), 500.0),
            // transformer impedance expressed as an equivalent line length
            Bus::B634 => (Some(Bus::B633), 500.0),
            Bus::B645 => (Some(Bus::B632), 500.0),
            Bus::B646 => (Some(Bus::B645), 300.0),
            Bus::B671 => (Some(Bus::B632), 2000.0),
            Bus::B680 => (Some(Bus::B671), 1000.0),
            Bus::B684 => (Some(Bus::B671), 300.0),
            Bus::B611 => (Some(Bus::B684), 300.0),
            Bus::B652 => (Some(Bus::B684), 800.0),
            // closed switch
            Bus::B692 => (Some(Bus::B671), 50.0),
            Bus::B675 => (Some(Bus::B692), 500.0),
        }
    }

    /// Buses from the substation down to `self`, with cumulative distance.
    fn path(self) -> Vec<(Bus, f64)> {
        let mut chain = vec![self];
        let mut cur = self;
        while let (Some(p), _) = cur.parent() {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        let mut dist = 0.0;
        chain
            .into_iter()
            .map(|b| {
                dist += b.parent().1;
                (b, dist)
            })
            .collect()
    }

    fn distance(self) -> f64 {
        self.path().last().map(|p| p.1).unwrap_or(0.0)
    }

    /// Feet of feeder path from the substation shared by both buses.
    fn shared_length(self, other: Bus) -> f64 {
        let a = self.path();
        let b = other.path();
        a.iter()
            .zip(&b)
            .take_while(|(x, y)| x.0 == y.0)
            .last()
            .map(|(x, _)| x.1)
            .unwrap_or(0.0)
    }

    fn base_kv(self) -> f64 {
        if self == Bus::B634 {
            0.48
        } else {
            4.16
        }
    }
}

struct ChannelSpec {
    bus: Bus,
    phase: Phase,
    /// Base-case magnitude, per unit.
    magnitude_pu: f64,
    /// Base-case angle, degrees.
    angle_deg: f64,
}

const fn ch(bus: Bus, phase: Phase, magnitude_pu: f64, angle_deg: f64) -> ChannelSpec {
    ChannelSpec {
        bus,
        phase,
        magnitude_pu,
        angle_deg,
    }
}

#[rustfmt::skip]
const CHANNELS: [ChannelSpec; CHANNEL_COUNT] = [
    ch(Bus::B632, Phase::A, 1.0210,   -2.49), ch(Bus::B632, Phase::B, 1.0420, -121.72), ch(Bus::B632, Phase::C, 1.0174, 117.83),
    ch(Bus::B633, Phase::A, 1.0180,   -2.56), ch(Bus::B633, Phase::B, 1.0401, -121.77), ch(Bus::B633, Phase::C, 1.0148, 117.82),
    ch(Bus::B634, Phase::A, 0.9940,   -3.23), ch(Bus::B634, Phase::B, 1.0218, -122.22), ch(Bus::B634, Phase::C, 0.9960, 117.34),
    ch(Bus::B645, Phase::B, 1.0329, -121.90), ch(Bus::B645, Phase::C, 1.0155,  117.86),
    ch(Bus::B646, Phase::B, 1.0311, -121.98), ch(Bus::B646, Phase::C, 1.0134,  117.90),
    ch(Bus::B671, Phase::A, 0.9900,   -5.30), ch(Bus::B671, Phase::B, 1.0529, -122.34), ch(Bus::B671, Phase::C, 0.9778, 116.02),
    ch(Bus::B680, Phase::A, 0.9900,   -5.30), ch(Bus::B680, Phase::B, 1.0529, -122.34), ch(Bus::B680, Phase::C, 0.9778, 116.02),
    ch(Bus::B684, Phase::A, 0.9881,   -5.32), ch(Bus::B684, Phase::C, 0.9758,  115.92),
    ch(Bus::B611, Phase::C, 0.9738,  115.78),
    ch(Bus::B652, Phase::A, 0.9825,   -5.25),
    ch(Bus::B692, Phase::A, 0.9900,   -5.31), ch(Bus::B692, Phase::B, 1.0529, -122.34), ch(Bus::B692, Phase::C, 0.9777, 116.03),
    ch(Bus::B675, Phase::A, 0.9835,   -5.56), ch(Bus::B675, Phase::B, 1.0553, -122.52), ch(Bus::B675, Phase::C, 0.9758, 116.03),
];

const FAR_END_FT: f64 = 5100.0;

impl ChannelSpec {
    fn name(&self) -> String {
        let p = match self.phase {
            Phase::A => "a",
            Phase::B => "b",
            Phase::C => "c",
        };
        format!("v{}{}", self.bus.name(), p)
    }

    /// Nominal peak line-to-neutral voltage.
    fn nominal_peak(&self) -> f64 {
        self.magnitude_pu * self.bus.base_kv() * 1000.0 / 3f64.sqrt() * 2f64.sqrt()
    }

    /// Ratio of this channel's voltage base to the primary (4.16 kV) base.
    fn turns_ratio(&self) -> f64 {
        self.bus.base_kv() / 4.16
    }
}

/// Channel names in column order (`v632a`, `v632b`, …).
pub fn channel_names() -> Vec<String> {
    CHANNELS.iter().map(ChannelSpec::name).collect()
}

/// Nominal peak voltage of every channel, volts.
pub fn nominal_peaks() -> Vec<f64> {
    CHANNELS.iter().map(ChannelSpec::nominal_peak).collect()
}

/// Bus and phase of each fault location.
fn fault_site(loc: FaultLocation) -> Option<(Bus, Phase)> {
    match loc {
        FaultLocation::None => None,
        FaultLocation::A => Some((Bus::B671, Phase::A)),
        FaultLocation::B => Some((Bus::B675, Phase::B)),
        FaultLocation::C => Some((Bus::B611, Phase::C)),
    }
}

fn site_channel(bus: Bus, phase: Phase) -> usize {
    CHANNELS
        .iter()
        .position(|c| c.bus == bus && c.phase == phase)
        .expect("fault sites are measured channels")
}

/// Volts of sag per ampere of arc current, per channel, for a fault location.
/// All zeros for [`FaultLocation::None`].
pub fn sag_coefficients(loc: FaultLocation) -> Vec<f64> {
    match fault_site(loc) {
        None => vec![0.0; CHANNEL_COUNT],
        Some((bus, phase)) => CHANNELS
            .iter()
            .map(|c| {
                if c.phase == phase {
                    SAG_OHMS_PER_FOOT * bus.shared_length(c.bus) * c.turns_ratio()
                } else {
                    0.0
                }
            })
            .collect(),
    }
}

/// Sampled waveforms of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSet {
    pub time: Vec<f64>,
    pub channel_names: Vec<String>,
    /// One sequence per channel, `CHANNEL_COUNT` of them.
    pub channels: Vec<Vec<f64>>,
    pub arc_current: Vec<f64>,
    pub label: ClassCode,
    pub sample_rate: f64,
    pub system_frequency: f64,
}

impl WaveformSet {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.time.len();
        if self.channels.len() != self.channel_names.len() {
            return Err(Error::invalid("channel names do not match channel count"));
        }
        if self.arc_current.len() != n || self.channels.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("waveform sequences differ in length"));
        }
        Ok(())
    }
}

/// AR(1) process with unit marginal variance, scaled by `sigma`.
struct Ar1 {
    state: f64,
    sigma: f64,
}

impl Ar1 {
    fn new(rng: &mut RngState, sigma: f64) -> Self {
        Ar1 {
            state: rng.normal(),
            sigma,
        }
    }

    fn step(&mut self, rng: &mut RngState) -> f64 {
        let rho = LOAD_CORRELATION;
        self.state = rho * self.state + (1.0 - rho * rho).sqrt() * rng.normal();
        self.sigma * self.state
    }
}

pub fn simulate_feeder(scenario: &ArcScenario) -> Result<WaveformSet> {
    scenario.validate()?;
    let fs = scenario.sample_rate;
    let f0 = scenario.arc.system_frequency;
    let spc = scenario.samples_per_cycle();
    let n = (scenario.duration * fs).round() as usize;
    if n == 0 {
        return Err(Error::invalid("scenario is shorter than one sample"));
    }
    let omega = 2.0 * std::f64::consts::PI * f0;
    let time: Vec<f64> = (0..n).map(|k| k as f64 / fs).collect();

    // per-cycle load multipliers per phase and source wander
    let mut load_rng = RngState::seeded(derive_seed(scenario.seed, "load", 0));
    let n_cycles = n.div_ceil(spc);
    let mut phase_load: [Ar1; 3] = std::array::from_fn(|_| Ar1::new(&mut load_rng, scenario.load_jitter));
    let wander = SOURCE_WANDER * scenario.load_jitter / super::DEFAULT_LOAD_JITTER;
    let mut source = Ar1::new(&mut load_rng, wander);
    let mut cycle_state = Vec::with_capacity(n_cycles);
    for _ in 0..n_cycles {
        let lambda: [f64; 3] = std::array::from_fn(|p| scenario.load_scale * (1.0 + phase_load[p].step(&mut load_rng)));
        let s = source.step(&mut load_rng);
        cycle_state.push((lambda, s));
    }

    let cap_share: Vec<f64> = CHANNELS
        .iter()
        .map(|c| Bus::B675.shared_length(c.bus) / FAR_END_FT)
        .collect();

    let mut channels: Vec<Vec<f64>> = CHANNELS
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let peak = c.nominal_peak();
            let theta = c.angle_deg.to_radians();
            let drop = LOAD_DROP_FRACTION * c.bus.distance() / FAR_END_FT;
            time.iter()
                .enumerate()
                .map(|(k, &t)| {
                    let (lambda, s) = cycle_state[k / spc];
                    let mut amp = peak * (1.0 + s) * (1.0 - drop * (lambda[c.phase.index()] - 1.0));
                    let mut ring = 0.0;
                    if let Some(ts) = scenario.capacitor_switch_at {
                        if t >= ts {
                            amp *= 1.0 + CAPACITOR_RISE * cap_share[j];
                            let (a, fr, tau) = CAPACITOR_RING;
                            let dt = t - ts;
                            ring = a * peak * cap_share[j] * (-dt / tau).exp() * (2.0 * std::f64::consts::PI * fr * dt).sin();
                        }
                    }
                    amp * (omega * t + theta).sin() + ring
                })
                .collect()
        })
        .collect();

    let arc = match fault_site(scenario.fault_location) {
        None => vec![0.0; n],
        Some((bus, phase)) => {
            let drive = &channels[site_channel(bus, phase)];
            let conduction = if scenario.broken_conductor {
                Conduction::PositiveOnly
            } else {
                Conduction::BothHalves
            };
            let i = arc_current_with(&scenario.arc, drive, fs, derive_seed(scenario.seed, "arc", 0), conduction)?;
            let sag = sag_coefficients(scenario.fault_location);
            for (chan, &k) in channels.iter_mut().zip(&sag) {
                if k != 0.0 {
                    for (v, a) in chan.iter_mut().zip(&i) {
                        *v -= k * a;
                    }
                }
            }
            i
        }
    };

    if scenario.noise_fraction > 0.0 {
        let mut noise_rng = RngState::seeded(derive_seed(scenario.seed, "noise", 0));
        for (chan, spec) in channels.iter_mut().zip(&CHANNELS) {
            let sigma = scenario.noise_fraction * spec.nominal_peak();
            for v in chan.iter_mut() {
                *v += sigma * noise_rng.normal();
            }
        }
    }

    let w = WaveformSet {
        time,
        channel_names: channel_names(),
        channels,
        arc_current: arc,
        label: scenario.fault_location.class_code(),
        sample_rate: fs,
        system_frequency: f0,
    };
    w.check()?;
    Ok(w)
}
