//! TOML scenario files.
//!
//! Every table and key is optional; missing entries take the reference
//! indoor values. Unknown keys are rejected so a typo cannot silently fall
//! back to a default.

use std::path::Path;

use serde::Deserialize;
use vlc_core::{DesignConfig, MaxMinConfig, OpticalParams, Point3, PowerParams, RoomScenario};

use crate::harness::{CsiMode, Design};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub realizations: usize,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
    pub room: RoomSection,
    pub optical: OpticalSection,
    pub power: PowerSection,
    pub design: DesignSection,
    pub sweep: SweepSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            realizations: 200,
            threads: 0,
            room: RoomSection::default(),
            optical: OpticalSection::default(),
            power: PowerSection::default(),
            design: DesignSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomSection {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub receiver_height: f64,
    /// Luminaire floor-plan positions; all hang at ceiling height.
    pub luminaires: Vec<[f64; 2]>,
}

impl Default for RoomSection {
    fn default() -> Self {
        let r = std::f64::consts::SQRT_2;
        Self {
            length: 5.0,
            width: 5.0,
            height: 3.0,
            receiver_height: 0.5,
            luminaires: vec![[-r, -r], [r, -r], [r, r], [-r, r]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticalSection {
    pub active_area: f64,
    pub semi_angle_deg: f64,
    pub fov_deg: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
    pub responsivity: f64,
    pub conversion: f64,
    pub bandwidth: f64,
    pub ambient_photocurrent: f64,
    pub preamp_density: f64,
}

impl Default for OpticalSection {
    fn default() -> Self {
        let o = OpticalParams::default();
        Self {
            active_area: o.active_area,
            semi_angle_deg: o.semi_angle_deg,
            fov_deg: o.fov_deg,
            filter_gain: o.filter_gain,
            refractive_index: o.refractive_index,
            responsivity: o.responsivity,
            conversion: o.conversion,
            bandwidth: o.bandwidth,
            ambient_photocurrent: o.ambient_photocurrent,
            preamp_density: o.preamp_density,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub p_circuit: f64,
    pub u_leds: f64,
    pub zeta: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        let p = PowerParams::default();
        Self {
            p_circuit: p.p_circuit,
            u_leds: p.u_leds,
            zeta: p.zeta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    /// Bob's SINR floor in dB.
    pub delta_b_db: f64,
    pub rho: f64,
    /// Stopping tolerance shared by the Dinkelbach, CCP and bisection loops.
    pub eps: f64,
    pub max_iter_dinkelbach: usize,
    pub max_iter_ccp: usize,
}

impl Default for DesignSection {
    fn default() -> Self {
        Self {
            delta_b_db: 0.0,
            rho: 0.2,
            eps: 1e-3,
            max_iter_dinkelbach: 30,
            max_iter_ccp: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub csi_mode: CsiMode,
    /// Scheme labels such as `miso`, `selective_siso_noan` or `fixed_siso_zf`;
    /// empty selects each command's own list.
    pub schemes: Vec<String>,
    /// Eves per realization for the power and ρ sweeps.
    pub n_eves: usize,
    pub p_t_dbm: Vec<f64>,
    pub rho: Vec<f64>,
    pub feasibility_p_t_dbm: Vec<f64>,
    pub k_eves: Vec<usize>,
    pub eves_p_t_dbm: f64,
    pub convergence_p_t_dbm: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            csi_mode: CsiMode::Unknown,
            schemes: Vec::new(),
            n_eves: 1,
            p_t_dbm: (0..10).map(|i| 26.0 + 2.0 * i as f64).collect(),
            rho: (0..=20).map(|i| i as f64 / 20.0).collect(),
            feasibility_p_t_dbm: vec![30.0, 35.0, 40.0],
            k_eves: (1..=5).collect(),
            eves_p_t_dbm: 26.0,
            convergence_p_t_dbm: 30.0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything a command could trip over, before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        for &p in self.all_powers().iter() {
            self.scenario_at(p)
                .validate()
                .map_err(|e| CliError::Config(format!("scenario at {p} dBm: {e}")))?;
        }
        self.design_config(
            &self.scenario_at(self.sweep.p_t_dbm.first().copied().unwrap_or(30.0)),
            self.design.rho,
        )
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.design.delta_b_db.is_finite()) {
            return bad("delta_b_db must be finite");
        }
        let s = &self.sweep;
        if s.p_t_dbm.is_empty()
            || s.rho.is_empty()
            || s.feasibility_p_t_dbm.is_empty()
            || s.k_eves.is_empty()
        {
            return bad("sweep grids must not be empty");
        }
        if s.rho
            .iter()
            .chain([&self.design.rho])
            .any(|r| !(r.is_finite() && *r >= 0.0))
        {
            return bad("rho values must be finite and non-negative");
        }
        if s.n_eves == 0 || s.k_eves.contains(&0) {
            return bad("at least one Eve is required");
        }
        for label in &s.schemes {
            let d: Design = label.parse().map_err(CliError::Config)?;
            if s.csi_mode == CsiMode::Known && d.variant == crate::harness::Variant::ZeroForcing {
                return bad("zero-forcing schemes exist only for unknown CSI");
            }
        }
        Ok(())
    }

    fn all_powers(&self) -> Vec<f64> {
        let s = &self.sweep;
        let mut v = s.p_t_dbm.clone();
        v.extend(&s.feasibility_p_t_dbm);
        v.push(s.eves_p_t_dbm);
        v.push(s.convergence_p_t_dbm);
        v
    }

    /// Room driven so each luminaire emits `p_t_dbm` on average.
    pub fn scenario_at(&self, p_t_dbm: f64) -> RoomScenario {
        let r = &self.room;
        let o = &self.optical;
        let mut s = RoomScenario::reference(1.0);
        s.length = r.length;
        s.width = r.width;
        s.height = r.height;
        s.receiver_height = r.receiver_height;
        s.luminaires = r
            .luminaires
            .iter()
            .map(|p| Point3::new(p[0], p[1], r.height))
            .collect();
        s.optical = OpticalParams {
            active_area: o.active_area,
            semi_angle_deg: o.semi_angle_deg,
            fov_deg: o.fov_deg,
            filter_gain: o.filter_gain,
            refractive_index: o.refractive_index,
            responsivity: o.responsivity,
            conversion: o.conversion,
            bandwidth: o.bandwidth,
            ambient_photocurrent: o.ambient_photocurrent,
            preamp_density: o.preamp_density,
        };
        s.power = PowerParams {
            p_circuit: self.power.p_circuit,
            u_leds: self.power.u_leds,
            zeta: self.power.zeta,
        };
        s.at_dbm(p_t_dbm)
    }

    pub fn delta_b(&self) -> f64 {
        10f64.powf(self.design.delta_b_db / 10.0)
    }

    pub fn design_config(&self, scenario: &RoomScenario, rho: f64) -> DesignConfig {
        let d = &self.design;
        DesignConfig {
            eps_dinkelbach: d.eps,
            eps_ccp: d.eps,
            max_iter_dinkelbach: d.max_iter_dinkelbach,
            max_iter_ccp: d.max_iter_ccp,
            ..DesignConfig::from_rho(rho, self.delta_b(), scenario)
        }
    }

    pub fn maxmin_config(&self, with_an: bool) -> MaxMinConfig {
        let d = &self.design;
        MaxMinConfig {
            eps_bisect: d.eps,
            eps_ccp: d.eps,
            max_iter_ccp: d.max_iter_ccp,
            with_an,
            ..MaxMinConfig::default()
        }
    }

    /// The configured schemes, or `fallback` when none are listed.
    pub fn designs_or(&self, fallback: &[&str]) -> Vec<Design> {
        let labels: Vec<&str> = if self.sweep.schemes.is_empty() {
            fallback.to_vec()
        } else {
            self.sweep.schemes.iter().map(String::as_str).collect()
        };
        labels
            .iter()
            .map(|l| l.parse().expect("labels are checked by validate"))
            .collect()
    }
}
