//! Monte Carlo sweeps over random receiver placements.
//!
//! Each realization owns a ChaCha stream selected by its index, so a sweep
//! draws the same rooms whatever the thread count, and every sweep point
//! sees the same placements (common random numbers across points and
//! schemes).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vlc_core::metrics;
use vlc_core::unknown_csi::{self, DesignStatus};
use vlc_core::{
    build_channel, channel_gain, maxmin_see, ChannelState, Point3, RoomScenario, SchemeKind,
};

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Unknown,
    Known,
}

impl CsiMode {
    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Unknown => "unknown",
            CsiMode::Known => "known",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// General design with artificial noise.
    Artificial,
    NoAn,
    /// AN confined to Bob's null space (unknown CSI only).
    ZeroForcing,
}

/// A transmission scheme together with its AN strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Design {
    pub kind: SchemeKind,
    pub variant: Variant,
}

impl Design {
    pub const fn new(kind: SchemeKind, variant: Variant) -> Self {
        Self { kind, variant }
    }

    pub fn label(&self) -> String {
        let suffix = match self.variant {
            Variant::Artificial => "",
            Variant::NoAn => "_noan",
            Variant::ZeroForcing => "_zf",
        };
        format!("{}{suffix}", self.kind.name())
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (base, variant) = if let Some(b) = s.strip_suffix("_noan") {
            (b, Variant::NoAn)
        } else if let Some(b) = s.strip_suffix("_zf") {
            (b, Variant::ZeroForcing)
        } else {
            (s, Variant::Artificial)
        };
        let kind = match base {
            "fixed_siso" => SchemeKind::FixedSiso,
            "selective_siso" => SchemeKind::SelectiveSiso,
            "miso" => SchemeKind::Miso,
            _ => return Err(format!("unknown scheme '{s}'")),
        };
        Ok(Self { kind, variant })
    }
}

/// What a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    PowerDbm(Vec<f64>),
    Rho {
        values: Vec<f64>,
        p_t_dbm: f64,
    },
    /// Number of Eves kept out of one placement of `max(values)` Eves.
    Eves {
        values: Vec<usize>,
        p_t_dbm: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub n_realizations: usize,
    pub seed: u64,
    pub designs: Vec<Design>,
    pub csi_mode: CsiMode,
    /// Eves per realization on the power and ρ axes.
    pub n_eves: usize,
    /// Room, optics and design parameters; its sweep table is ignored.
    pub settings: Config,
}

/// Operating point of one sweep value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub p_t_dbm: f64,
    pub rho: f64,
    pub k_eves: usize,
}

/// Statistics of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointStats {
    pub p_t_dbm: f64,
    pub rho: f64,
    pub k_eves: usize,
    pub scheme: String,
    /// Over the scheme's own feasible realizations.
    pub mean_ee: f64,
    /// Over realizations feasible for every scheme of the sweep.
    pub mean_see: f64,
    /// Sample standard deviation behind `mean_see`.
    pub sd_see: f64,
    pub feas_prob: f64,
    pub mean_sinr_gap_db: f64,
    pub n_feasible: usize,
    /// Realizations feasible for every scheme, the sample behind `mean_see`.
    pub n_paired: usize,
    /// Realizations where the solver returned an error.
    pub n_failed: usize,
    /// Dinkelbach iterations, or bisection feasibility tests for known CSI.
    pub mean_outer_iters: f64,
    pub mean_ccp_iters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub points: Vec<PointStats>,
}

/// Outcome of one design on one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub feasible: bool,
    pub failed: bool,
    pub ee: f64,
    pub see: f64,
    pub sinr_gap_db: f64,
    pub outer_iters: f64,
    pub ccp_iters: f64,
}

impl Sample {
    fn infeasible(failed: bool) -> Self {
        Self {
            feasible: false,
            failed,
            ee: 0.0,
            see: 0.0,
            sinr_gap_db: 0.0,
            outer_iters: 0.0,
            ccp_iters: 0.0,
        }
    }
}

/// Floor-plan positions of Bob and the Eves.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub bob: (f64, f64),
    pub eves: Vec<(f64, f64)>,
}

/// Random stream of realization `index`.
pub fn realization_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sees_a_luminaire(scenario: &RoomScenario, x: f64, y: f64) -> bool {
    let rx = Point3::new(x, y, scenario.receiver_height);
    scenario
        .luminaires
        .iter()
        .any(|tx| channel_gain(tx, &rx, &scenario.optical).map_or(false, |g| g > 0.0))
}

/// Bob then `k` Eves, uniform over the floor, redrawing any position that
/// no luminaire reaches.
pub fn place_receivers<R: Rng>(rng: &mut R, scenario: &RoomScenario, k: usize) -> Placement {
    let (hx, hy) = (scenario.length / 2.0, scenario.width / 2.0);
    let mut draw = || loop {
        let x = rng.gen_range(-hx..=hx);
        let y = rng.gen_range(-hy..=hy);
        if sees_a_luminaire(scenario, x, y) {
            return (x, y);
        }
    };
    let bob = draw();
    let eves = (0..k).map(|_| draw()).collect();
    Placement { bob, eves }
}

/// Worst Bob-over-Eve SINR gap.
pub fn sinr_gap(channel: &ChannelState, sol: &vlc_core::PrecoderSolution) -> f64 {
    (0..channel.eves.len())
        .map(|k| metrics::sinr_gap_db(channel, sol, k))
        .fold(f64::INFINITY, f64::min)
}

fn mean(v: &[usize]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<usize>() as f64 / v.len() as f64
    }
}

/// Mean and sample standard deviation; NaN where undefined.
fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Runs one design on one channel.
pub fn evaluate(
    design: Design,
    csi: CsiMode,
    scenario: &RoomScenario,
    channel: &ChannelState,
    settings: &Config,
    rho: f64,
) -> Sample {
    match csi {
        CsiMode::Unknown => {
            let cfg = settings.design_config(scenario, rho);
            let out = match design.variant {
                Variant::Artificial => unknown_csi::general_design(channel, scenario, &cfg),
                Variant::NoAn => unknown_csi::solve_p1_noan(channel, scenario, &cfg),
                Variant::ZeroForcing => unknown_csi::zf_design(channel, scenario, &cfg),
            };
            match out {
                Ok(o) if o.status == DesignStatus::Solved => Sample {
                    feasible: true,
                    failed: false,
                    ee: o.ee_bob,
                    see: o.resultant_see.unwrap_or(0.0),
                    sinr_gap_db: sinr_gap(channel, &o.sol),
                    outer_iters: o.dinkelbach_iters as f64,
                    ccp_iters: mean(&o.ccp_iters_per_stage),
                },
                Ok(_) => Sample::infeasible(false),
                Err(e) => {
                    log::warn!("{design} design failed: {e}");
                    Sample::infeasible(true)
                }
            }
        }
        CsiMode::Known => {
            let with_an = match design.variant {
                Variant::Artificial => true,
                Variant::NoAn => false,
                Variant::ZeroForcing => {
                    log::warn!("{design} has no known-CSI design");
                    return Sample::infeasible(true);
                }
            };
            match maxmin_see(channel, scenario, &settings.maxmin_config(with_an)) {
                Ok(o) => Sample {
                    feasible: true,
                    failed: false,
                    ee: metrics::ee_bob(scenario, channel, &o.sol),
                    see: metrics::min_see(scenario, channel, &o.sol).unwrap_or(0.0),
                    sinr_gap_db: sinr_gap(channel, &o.sol),
                    outer_iters: o.trace.len() as f64,
                    ccp_iters: mean(&o.ccp_iterations),
                },
                Err(e) => {
                    log::warn!("{design} max-min design failed: {e}");
                    Sample::infeasible(true)
                }
            }
        }
    }
}

impl SweepSpec {
    pub fn points(&self) -> Vec<SweepPoint> {
        let rho = self.settings.design.rho;
        match &self.axis {
            SweepAxis::PowerDbm(v) => v
                .iter()
                .map(|&p| SweepPoint {
                    p_t_dbm: p,
                    rho,
                    k_eves: self.n_eves,
                })
                .collect(),
            SweepAxis::Rho { values, p_t_dbm } => values
                .iter()
                .map(|&r| SweepPoint {
                    p_t_dbm: *p_t_dbm,
                    rho: r,
                    k_eves: self.n_eves,
                })
                .collect(),
            SweepAxis::Eves { values, p_t_dbm } => values
                .iter()
                .map(|&k| SweepPoint {
                    p_t_dbm: *p_t_dbm,
                    rho,
                    k_eves: k,
                })
                .collect(),
        }
    }

    fn eves_drawn(&self) -> usize {
        match &self.axis {
            SweepAxis::Eves { values, .. } => values.iter().copied().max().unwrap_or(1),
            _ => self.n_eves,
        }
    }

    /// Every design on realization `index` at `point`.
    pub fn realization(&self, point: &SweepPoint, index: usize) -> Vec<Sample> {
        let scenario = self.settings.scenario_at(point.p_t_dbm);
        let mut rng = realization_rng(self.seed, index);
        let placement = place_receivers(&mut rng, &scenario, self.eves_drawn());
        let eves = &placement.eves[..point.k_eves.min(placement.eves.len())];
        self.designs
            .iter()
            .map(
                |&d| match build_channel(&scenario, placement.bob, eves, d.kind) {
                    Ok(ch) => evaluate(d, self.csi_mode, &scenario, &ch, &self.settings, point.rho),
                    Err(e) => {
                        log::warn!("realization {index}: channel build failed: {e}");
                        Sample::infeasible(true)
                    }
                },
            )
            .collect()
    }
}

/// Runs every (point, realization) pair and reduces in index order.
pub fn run_sweep(spec: &SweepSpec) -> Result<ExperimentResult, CliError> {
    if spec.n_realizations == 0 || spec.designs.is_empty() {
        return Err(CliError::Config(
            "a sweep needs at least one realization and one scheme".into(),
        ));
    }
    let points = spec.points();
    let n = spec.n_realizations;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..n).map(move |r| (p, r)))
        .collect();
    let samples: Vec<Vec<Sample>> = jobs
        .par_iter()
        .map(|&(p, r)| spec.realization(&points[p], r))
        .collect();

    let mut out = Vec::new();
    for (p, point) in points.iter().enumerate() {
        let rows = &samples[p * n..(p + 1) * n];
        let paired: Vec<&Vec<Sample>> = rows
            .iter()
            .filter(|s| s.iter().all(|x| x.feasible))
            .collect();
        for (d, design) in spec.designs.iter().enumerate() {
            let own: Vec<&Sample> = rows.iter().map(|s| &s[d]).filter(|s| s.feasible).collect();
            let avg = |f: &dyn Fn(&Sample) -> f64| -> f64 {
                if own.is_empty() {
                    f64::NAN
                } else {
                    own.iter().map(|s| f(s)).sum::<f64>() / own.len() as f64
                }
            };
            let see: Vec<f64> = paired.iter().map(|s| s[d].see).collect();
            let (mean_see, sd_see) = mean_sd(&see);
            out.push(PointStats {
                p_t_dbm: point.p_t_dbm,
                rho: point.rho,
                k_eves: point.k_eves,
                scheme: design.label(),
                mean_ee: avg(&|s| s.ee),
                mean_see,
                sd_see,
                feas_prob: own.len() as f64 / n as f64,
                mean_sinr_gap_db: avg(&|s| s.sinr_gap_db),
                n_feasible: own.len(),
                n_paired: paired.len(),
                n_failed: rows.iter().filter(|s| s[d].failed).count(),
                mean_outer_iters: avg(&|s| s.outer_iters),
                mean_ccp_iters: avg(&|s| s.ccp_iters),
            });
        }
    }
    Ok(ExperimentResult { points: out })
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub realization: usize,
    pub scheme: String,
    pub algo: &'static str,
    pub iter: usize,
    pub error: f64,
}

/// Dinkelbach errors and the first stage's CCP errors of the unknown-CSI
/// design, one realization after another.
pub fn convergence_traces(
    settings: &Config,
    designs: &[Design],
    p_t_dbm: f64,
    n_realizations: usize,
    seed: u64,
) -> Vec<TraceRow> {
    let scenario = settings.scenario_at(p_t_dbm);
    let per: Vec<Vec<TraceRow>> = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let placement = place_receivers(
                &mut realization_rng(seed, r),
                &scenario,
                settings.sweep.n_eves,
            );
            let mut rows = Vec::new();
            for d in designs {
                let cfg = settings.design_config(&scenario, settings.design.rho);
                let out = build_channel(&scenario, placement.bob, &placement.eves, d.kind)
                    .and_then(|ch| match d.variant {
                        Variant::Artificial => unknown_csi::general_design(&ch, &scenario, &cfg),
                        Variant::NoAn => unknown_csi::solve_p1_noan(&ch, &scenario, &cfg),
                        Variant::ZeroForcing => unknown_csi::zf_design(&ch, &scenario, &cfg),
                    });
                let out = match out {
                    Ok(o) => o,
                    Err(e) => {
                        log::warn!("realization {r}: {d} failed: {e}");
                        continue;
                    }
                };
                let label = d.label();
                for (i, e) in out.dinkelbach_errors.iter().enumerate() {
                    rows.push(TraceRow {
                        realization: r,
                        scheme: label.clone(),
                        algo: "dinkelbach",
                        iter: i + 1,
                        error: *e,
                    });
                }
                for (i, e) in out.ccp_errors.first().into_iter().flatten().enumerate() {
                    rows.push(TraceRow {
                        realization: r,
                        scheme: label.clone(),
                        algo: "ccp",
                        iter: i + 1,
                        error: *e,
                    });
                }
            }
            rows
        })
        .collect();
    per.into_iter().flatten().collect()
}
