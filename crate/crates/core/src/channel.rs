//! Indoor line-of-sight channel geometry and receiver noise.
//!
//! Coordinates are metres with the origin at the centre of the floor.
//! Luminaires point straight down and photodiodes straight up, so the
//! irradiance and incidence angles coincide.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{abs, cos, deg_to_rad, ln, powf, sin, sqrt};
use crate::metrics::PowerParams;
use crate::{Error, Result};

/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        sqrt(dx * dx + dy * dy + dz * dz)
    }
}

/// LED and photodiode parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalParams {
    /// Photodiode active area `A_r` (m²).
    pub active_area: f64,
    /// LED semi-angle at half illuminance `Θ_0.5` (degrees).
    pub semi_angle_deg: f64,
    /// Receiver field of view `Ψ` (degrees).
    pub fov_deg: f64,
    /// Optical filter gain `T_s`.
    pub filter_gain: f64,
    /// Concentrator refractive index `κ`.
    pub refractive_index: f64,
    /// Photodiode responsivity `γ` (A/W).
    pub responsivity: f64,
    /// LED conversion factor `η` (W/A).
    pub conversion: f64,
    /// Modulation bandwidth `B_mod` (Hz). Also used as the ambient-noise bandwidth.
    pub bandwidth: f64,
    /// Ambient light photocurrent `χ_amb` (A/(m²·sr)).
    pub ambient_photocurrent: f64,
    /// Pre-amplifier noise current density `i_amp` (A/√Hz).
    pub preamp_density: f64,
}

impl Default for OpticalParams {
    /// The reference indoor parameter set (1 cm² photodiode, 60° FOV, 20 MHz LEDs).
    fn default() -> Self {
        Self {
            active_area: 1e-4,
            semi_angle_deg: 60.0,
            fov_deg: 60.0,
            filter_gain: 1.0,
            refractive_index: 1.5,
            responsivity: 0.54,
            conversion: 0.44,
            bandwidth: 20e6,
            ambient_photocurrent: 10.93,
            preamp_density: 5e-12,
        }
    }
}

impl OpticalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.active_area,
            self.semi_angle_deg,
            self.fov_deg,
            self.filter_gain,
            self.refractive_index,
            self.responsivity,
            self.conversion,
            self.bandwidth,
            self.ambient_photocurrent,
            self.preamp_density,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(
                "optical parameters must be strictly positive",
            ));
        }
        if self.fov_deg > 90.0 {
            return Err(Error::Domain("field of view must lie in (0, 90] degrees"));
        }
        if self.semi_angle_deg >= 90.0 {
            return Err(Error::Domain("semi-angle must lie in (0, 90) degrees"));
        }
        Ok(())
    }

    /// Concentrator gain inside the field of view, `κ² / sin²Ψ`.
    pub fn concentrator_gain(&self) -> f64 {
        let s = sin(deg_to_rad(self.fov_deg));
        self.refractive_index * self.refractive_index / (s * s)
    }
}

/// Room, luminaire layout and drive currents.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomScenario {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub luminaires: Vec<Point3>,
    pub receiver_height: f64,
    /// DC bias `I_DC` (A).
    pub dc_bias: f64,
    pub i_min: f64,
    pub i_max: f64,
    pub optical: OpticalParams,
    pub power: PowerParams,
}

impl RoomScenario {
    /// 5 × 5 × 3 m room with four ceiling luminaires at (±√2, ±√2, 3),
    /// receivers 0.5 m above the floor, `I_min = 0` and `I_max = 2·I_DC`.
    pub fn reference(dc_bias: f64) -> Self {
        let r = core::f64::consts::SQRT_2;
        Self {
            length: 5.0,
            width: 5.0,
            height: 3.0,
            luminaires: alloc::vec![
                Point3::new(-r, -r, 3.0),
                Point3::new(r, -r, 3.0),
                Point3::new(r, r, 3.0),
                Point3::new(-r, r, 3.0),
            ],
            receiver_height: 0.5,
            dc_bias,
            i_min: 0.0,
            i_max: 2.0 * dc_bias,
            optical: OpticalParams::default(),
            power: PowerParams::default(),
        }
    }

    /// [`RoomScenario::reference`] driven at an average emitted optical power per luminaire (dBm).
    pub fn reference_at_dbm(p_t_dbm: f64) -> Self {
        let optical = OpticalParams::default();
        Self::reference(dc_bias_for_dbm(p_t_dbm, optical.conversion))
    }

    /// Returns a copy driven at `p_t_dbm`, keeping `I_max − I_DC = I_DC − I_min` margins
    /// proportional (`I_min = 0`, `I_max = 2·I_DC`).
    pub fn at_dbm(&self, p_t_dbm: f64) -> Self {
        let mut s = self.clone();
        s.dc_bias = dc_bias_for_dbm(p_t_dbm, s.optical.conversion);
        s.i_min = 0.0;
        s.i_max = 2.0 * s.dc_bias;
        s
    }

    pub fn n_tx(&self) -> usize {
        self.luminaires.len()
    }

    /// Modulation headroom `Δ_DC`.
    pub fn delta_dc(&self) -> f64 {
        let lo = self.dc_bias - self.i_min;
        let hi = self.i_max - self.dc_bias;
        if lo < hi {
            lo
        } else {
            hi
        }
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        abs(x) <= self.length / 2.0 + 1e-12 && abs(y) <= self.width / 2.0 + 1e-12
    }

    pub fn validate(&self) -> Result<()> {
        self.optical.validate()?;
        self.power.validate()?;
        if !(self.length > 0.0 && self.width > 0.0 && self.height > 0.0) {
            return Err(Error::Domain("room dimensions must be positive"));
        }
        if self.luminaires.len() < 2 {
            return Err(Error::Domain("at least two luminaires are required"));
        }
        for p in &self.luminaires {
            if abs(p.z - self.height) > 1e-9 {
                return Err(Error::Domain(
                    "luminaires must be mounted at ceiling height",
                ));
            }
            if !self.contains_xy(p.x, p.y) {
                return Err(Error::Domain("luminaire outside the room footprint"));
            }
        }
        if !(self.receiver_height >= 0.0 && self.receiver_height < self.height) {
            return Err(Error::Domain("receiver height must be below the ceiling"));
        }
        if !(self.dc_bias > 0.0) || self.i_min > self.dc_bias || self.dc_bias > self.i_max {
            return Err(Error::Domain("need I_min <= I_DC <= I_max with I_DC > 0"));
        }
        Ok(())
    }
}

/// `I_DC` such that each luminaire emits `p_t_dbm` on average (`p̄_t = η·I_DC`).
pub fn dc_bias_for_dbm(p_t_dbm: f64, conversion: f64) -> f64 {
    powf(10.0, (p_t_dbm - 30.0) / 10.0) / conversion
}

/// Lambertian emission order `m = −ln 2 / ln cos Θ_0.5`.
pub fn lambertian_order(semi_angle_deg: f64) -> Result<f64> {
    if !(semi_angle_deg > 0.0 && semi_angle_deg < 90.0) {
        return Err(Error::Domain("semi-angle must lie in (0, 90) degrees"));
    }
    Ok(-core::f64::consts::LN_2 / ln(cos(deg_to_rad(semi_angle_deg))))
}

/// Line-of-sight DC gain between a downward-facing luminaire and an upward-facing receiver.
pub fn channel_gain(tx: &Point3, rx: &Point3, optical: &OpticalParams) -> Result<f64> {
    let l = tx.distance(rx);
    if !(l > 0.0) {
        return Err(Error::Domain("transmitter and receiver coincide"));
    }
    let dz = tx.z - rx.z;
    if !(dz > 0.0) {
        return Err(Error::Domain("transmitter must be above the receiver"));
    }
    let cos_psi = dz / l;
    // ψ ≤ Ψ ⇔ cos ψ ≥ cos Ψ; the tiny slack keeps ψ = Ψ inside the closed interval.
    if cos_psi < cos(deg_to_rad(optical.fov_deg)) - 1e-15 {
        return Ok(0.0);
    }
    let m = lambertian_order(optical.semi_angle_deg)?;
    let h = optical.active_area * (m + 1.0) / (2.0 * PI * l * l)
        * optical.filter_gain
        * optical.concentrator_gain()
        * powf(cos_psi, m)
        * cos_psi;
    Ok(h)
}

/// Receiver noise variance (A²) from shot, ambient and amplifier noise.
pub fn noise_variance(channel_gains: &[f64], dc_bias: f64, optical: &OpticalParams) -> f64 {
    let e = ELEMENTARY_CHARGE;
    let b = optical.bandwidth;
    let received: f64 = optical.conversion * dc_bias * channel_gains.iter().sum::<f64>();
    let shot = 2.0 * optical.responsivity * e * received * b;
    let ambient = 4.0
        * PI
        * e
        * optical.active_area
        * optical.responsivity
        * optical.ambient_photocurrent
        * (1.0 - cos(deg_to_rad(optical.fov_deg)))
        * b;
    let amp = optical.preamp_density * optical.preamp_density * b;
    shot + ambient + amp
}

/// Noise variance normalised by the uniform-symbol power `(γη)²/3`.
pub fn normalized_noise(sigma2: f64, optical: &OpticalParams) -> f64 {
    let ge = optical.responsivity * optical.conversion;
    sigma2 / (ge * ge / 3.0)
}

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Luminaire 1 always carries data, the others jam.
    FixedSiso,
    /// The luminaire with the strongest gain to Bob carries data, the others jam.
    SelectiveSiso,
    /// Every luminaire carries precoded data plus artificial noise.
    Miso,
}

impl SchemeKind {
    pub fn is_siso(self) -> bool {
        !matches!(self, SchemeKind::Miso)
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::FixedSiso => "fixed_siso",
            SchemeKind::SelectiveSiso => "selective_siso",
            SchemeKind::Miso => "miso",
        }
    }
}

/// One receiver's view of the luminaires, split by role.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChannel {
    /// Gain from every luminaire, in luminaire order.
    pub gains: Vec<f64>,
    /// Gains seen by the information precoder (`h_R` or the full vector for MISO).
    pub info: Vec<f64>,
    /// Gains seen by the artificial-noise precoder (`h̄_R`).
    pub jam: Vec<f64>,
    /// Normalised noise variance `σ̄²_R`.
    pub noise_norm: f64,
}

impl ReceiverChannel {
    fn split(gains: Vec<f64>, noise_norm: f64, scheme: SchemeKind, alice: Option<usize>) -> Self {
        let (info, jam) = match (scheme, alice) {
            (SchemeKind::Miso, _) | (_, None) => (gains.clone(), gains.clone()),
            (_, Some(a)) => (
                alloc::vec![gains[a]],
                gains
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != a)
                    .map(|(_, g)| *g)
                    .collect(),
            ),
        };
        Self {
            gains,
            info,
            jam,
            noise_norm,
        }
    }
}

/// Bob's and every Eve's channels for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub scheme: SchemeKind,
    pub bob: ReceiverChannel,
    pub eves: Vec<ReceiverChannel>,
    /// Index (0-based) of the data-carrying luminaire for SISO schemes.
    pub alice_index: Option<usize>,
}

impl ChannelState {
    /// Builds a channel from raw per-luminaire gains and normalised noise variances.
    pub fn from_gains(
        scheme: SchemeKind,
        bob_gains: Vec<f64>,
        bob_noise_norm: f64,
        eves: Vec<(Vec<f64>, f64)>,
    ) -> Result<Self> {
        if bob_gains.len() < 2 {
            return Err(Error::Domain("at least two luminaires are required"));
        }
        let all =
            core::iter::once((&bob_gains, bob_noise_norm)).chain(eves.iter().map(|(g, n)| (g, *n)));
        for (g, n) in all {
            if g.len() != bob_gains.len() {
                return Err(Error::Domain(
                    "gain vectors must have one entry per luminaire",
                ));
            }
            if g.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::Domain("channel gains must be non-negative"));
            }
            if !(n > 0.0) {
                return Err(Error::Domain("noise variances must be positive"));
            }
        }
        if bob_gains.iter().all(|g| *g == 0.0) {
            return Err(Error::DegenerateChannel);
        }
        let alice_index = match scheme {
            SchemeKind::FixedSiso => Some(0),
            SchemeKind::SelectiveSiso => {
                let mut best = 0;
                for (i, g) in bob_gains.iter().enumerate() {
                    if *g > bob_gains[best] {
                        best = i;
                    }
                }
                Some(best)
            }
            SchemeKind::Miso => None,
        };
        Ok(Self {
            scheme,
            bob: ReceiverChannel::split(bob_gains, bob_noise_norm, scheme, alice_index),
            eves: eves
                .into_iter()
                .map(|(g, n)| ReceiverChannel::split(g, n, scheme, alice_index))
                .collect(),
            alice_index,
        })
    }

    pub fn receiver(&self, who: crate::metrics::Receiver) -> &ReceiverChannel {
        match who {
            crate::metrics::Receiver::Bob => &self.bob,
            crate::metrics::Receiver::Eve(k) => &self.eves[k],
        }
    }

    pub fn n_tx(&self) -> usize {
        self.bob.gains.len()
    }

    /// Keeps only the first `k` eavesdroppers.
    pub fn with_eves(&self, k: usize) -> Self {
        let mut c = self.clone();
        c.eves.truncate(k);
        c
    }
}

fn receiver_gains(scenario: &RoomScenario, x: f64, y: f64) -> Result<(Vec<f64>, f64)> {
    if !scenario.contains_xy(x, y) {
        return Err(Error::Domain("receiver outside the room footprint"));
    }
    let rx = Point3::new(x, y, scenario.receiver_height);
    let gains = scenario
        .luminaires
        .iter()
        .map(|tx| channel_gain(tx, &rx, &scenario.optical))
        .collect::<Result<Vec<_>>>()?;
    let sigma2 = noise_variance(&gains, scenario.dc_bias, &scenario.optical);
    Ok((gains, normalized_noise(sigma2, &scenario.optical)))
}

/// Computes Bob's and the Eves' channels for receivers at floor positions `(x, y)`.
pub fn build_channel(
    scenario: &RoomScenario,
    bob_xy: (f64, f64),
    eve_xys: &[(f64, f64)],
    scheme: SchemeKind,
) -> Result<ChannelState> {
    scenario.validate()?;
    let (bg, bn) = receiver_gains(scenario, bob_xy.0, bob_xy.1)?;
    let eves = eve_xys
        .iter()
        .map(|&(x, y)| receiver_gains(scenario, x, y))
        .collect::<Result<Vec<_>>>()?;
    ChannelState::from_gains(scheme, bg, bn, eves)
}
