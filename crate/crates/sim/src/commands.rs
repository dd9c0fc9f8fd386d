//! One function per CLI subcommand, each returning the table it writes.

use serde_json::json;
use vlc_core::unknown_csi::{self, DesignStatus};
use vlc_core::{build_channel, maxmin_see, metrics};

use crate::config::Config;
use crate::harness::{self, CsiMode, Design, SweepAxis, SweepSpec, Variant};
use crate::output::{num, Table};
use crate::CliError;

pub const SWEEP_POWER_HEADER: [&str; 8] = [
    "p_t_dbm",
    "scheme",
    "csi_mode",
    "mean_ee",
    "mean_see",
    "feas_prob",
    "mean_sinr_gap_db",
    "n_feasible",
];
pub const FEASIBILITY_HEADER: [&str; 4] = ["rho", "p_t_dbm", "scheme", "feas_prob"];
pub const EVES_HEADER: [&str; 3] = ["k_eves", "scheme", "mean_min_see"];
pub const CONVERGENCE_HEADER: [&str; 5] = ["realization", "scheme", "algo", "iter", "error"];

const BASE: [&str; 3] = ["fixed_siso", "selective_siso", "miso"];
const WITH_ZF: [&str; 6] = [
    "fixed_siso",
    "selective_siso",
    "miso",
    "fixed_siso_zf",
    "selective_siso_zf",
    "miso_zf",
];
const WITH_NOAN: [&str; 6] = [
    "fixed_siso",
    "selective_siso",
    "miso",
    "fixed_siso_noan",
    "selective_siso_noan",
    "miso_noan",
];

fn spec(cfg: &Config, axis: SweepAxis, designs: Vec<Design>, csi_mode: CsiMode) -> SweepSpec {
    SweepSpec {
        axis,
        n_realizations: cfg.realizations,
        seed: cfg.seed,
        designs,
        csi_mode,
        n_eves: cfg.sweep.n_eves,
        settings: cfg.clone(),
    }
}

fn reject_zf(designs: &[Design], what: &str) -> Result<(), CliError> {
    if designs.iter().any(|d| d.variant == Variant::ZeroForcing) {
        return Err(CliError::Config(format!(
            "{what} uses known CSI, which has no zero-forcing design"
        )));
    }
    Ok(())
}

/// EE, SEE, feasibility and SINR gap against `p̄_t`.
pub fn sweep_power(cfg: &Config) -> Result<Table, CliError> {
    cfg.validate()?;
    let designs = cfg.designs_or(&BASE);
    let csi = cfg.sweep.csi_mode;
    if csi == CsiMode::Known {
        reject_zf(&designs, "sweep-power")?;
    }
    let res = harness::run_sweep(&spec(
        cfg,
        SweepAxis::PowerDbm(cfg.sweep.p_t_dbm.clone()),
        designs,
        csi,
    ))?;
    let mut t = Table::new(&SWEEP_POWER_HEADER);
    for p in res.points {
        t.push(vec![
            num(p.p_t_dbm),
            p.scheme,
            csi.name().into(),
            num(p.mean_ee),
            num(p.mean_see),
            num(p.feas_prob),
            num(p.mean_sinr_gap_db),
            p.n_feasible.to_string(),
        ]);
    }
    Ok(t)
}

/// Feasibility probability against ρ. Only the unknown-CSI designs have
/// constraints that can fail, so `csi_mode` is ignored here.
pub fn feasibility(cfg: &Config) -> Result<Table, CliError> {
    cfg.validate()?;
    let designs = cfg.designs_or(&WITH_ZF);
    let mut t = Table::new(&FEASIBILITY_HEADER);
    for &p_t in &cfg.sweep.feasibility_p_t_dbm {
        let axis = SweepAxis::Rho {
            values: cfg.sweep.rho.clone(),
            p_t_dbm: p_t,
        };
        let res = harness::run_sweep(&spec(cfg, axis, designs.clone(), CsiMode::Unknown))?;
        for p in res.points {
            t.push(vec![num(p.rho), num(p.p_t_dbm), p.scheme, num(p.feas_prob)]);
        }
    }
    Ok(t)
}

/// Mean max-min SEE against the number of Eves.
pub fn eves_sweep(cfg: &Config) -> Result<Table, CliError> {
    cfg.validate()?;
    let designs = cfg.designs_or(&WITH_NOAN);
    reject_zf(&designs, "eves-sweep")?;
    let axis = SweepAxis::Eves {
        values: cfg.sweep.k_eves.clone(),
        p_t_dbm: cfg.sweep.eves_p_t_dbm,
    };
    let res = harness::run_sweep(&spec(cfg, axis, designs, CsiMode::Known))?;
    let mut t = Table::new(&EVES_HEADER);
    for p in res.points {
        t.push(vec![p.k_eves.to_string(), p.scheme, num(p.mean_see)]);
    }
    Ok(t)
}

/// Per-iteration errors of the Dinkelbach and CCP loops.
pub fn convergence(cfg: &Config) -> Result<Table, CliError> {
    cfg.validate()?;
    let designs = cfg.designs_or(&["selective_siso", "miso"]);
    let rows = harness::convergence_traces(
        cfg,
        &designs,
        cfg.sweep.convergence_p_t_dbm,
        cfg.realizations,
        cfg.seed,
    );
    let mut t = Table::new(&CONVERGENCE_HEADER);
    for r in rows {
        t.push(vec![
            r.realization.to_string(),
            r.scheme,
            r.algo.into(),
            r.iter.to_string(),
            num(r.error),
        ]);
    }
    Ok(t)
}

/// Receivers and scheme of a single design run.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleShot {
    pub design: Design,
    pub csi_mode: CsiMode,
    pub p_t_dbm: f64,
    pub bob: (f64, f64),
    pub eves: Vec<(f64, f64)>,
}

/// Runs one design and describes the outcome as JSON.
pub fn design(cfg: &Config, shot: &SingleShot) -> Result<serde_json::Value, CliError> {
    cfg.validate()?;
    let d = shot.design;
    if shot.csi_mode == CsiMode::Known {
        reject_zf(&[d], "design")?;
        if shot.eves.is_empty() {
            return Err(CliError::Config(
                "known-CSI design needs at least one --eve".into(),
            ));
        }
    }
    let scenario = cfg.scenario_at(shot.p_t_dbm);
    let ch = build_channel(&scenario, shot.bob, &shot.eves, d.kind)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let runtime = |e: vlc_core::Error| CliError::Runtime(e.to_string());
    let gap = if ch.eves.is_empty() {
        None
    } else {
        Some(harness::sinr_gap)
    };

    match shot.csi_mode {
        CsiMode::Unknown => {
            let dc = cfg.design_config(&scenario, cfg.design.rho);
            let out = match d.variant {
                Variant::Artificial => unknown_csi::general_design(&ch, &scenario, &dc),
                Variant::NoAn => unknown_csi::solve_p1_noan(&ch, &scenario, &dc),
                Variant::ZeroForcing => unknown_csi::zf_design(&ch, &scenario, &dc),
            }
            .map_err(runtime)?;
            Ok(json!({
                "scheme": d.label(),
                "csi_mode": "unknown",
                "p_t_dbm": shot.p_t_dbm,
                "status": if out.status == DesignStatus::Solved { "solved" } else { "infeasible" },
                "info": out.sol.info,
                "an": out.sol.an,
                "ee_bob": out.ee_bob,
                "resultant_see": out.resultant_see,
                "sinr_gap_db": gap.map(|f| f(&ch, &out.sol)),
                "dinkelbach_iters": out.dinkelbach_iters,
                "ccp_iters_per_stage": out.ccp_iters_per_stage,
                "lambda_trace": out.lambda_trace,
                "dinkelbach_errors": out.dinkelbach_errors,
            }))
        }
        CsiMode::Known => {
            let out = maxmin_see(
                &ch,
                &scenario,
                &cfg.maxmin_config(d.variant == Variant::Artificial),
            )
            .map_err(runtime)?;
            Ok(json!({
                "scheme": d.label(),
                "csi_mode": "known",
                "p_t_dbm": shot.p_t_dbm,
                "status": "solved",
                "info": out.sol.info,
                "an": out.sol.an,
                "ee_bob": metrics::ee_bob(&scenario, &ch, &out.sol),
                "t_star": out.t_star,
                "min_see": out.min_see,
                "sinr_gap_db": gap.map(|f| f(&ch, &out.sol)),
                "bracket": [out.bracket.0, out.bracket.1],
                "bisection_steps": out.bisection_steps,
                "trace": out.trace,
                "ccp_iterations": out.ccp_iterations,
            }))
        }
    }
}
