//! Designs that never see the eavesdroppers' channels.
//!
//! Bob's energy efficiency `C_B,l / P` is maximised by a Dinkelbach outer
//! loop whose parametric subproblems are solved by a convex-concave
//! procedure. Everything inside the loop works in normalised units:
//! `x = v/Δ_DC`, `y = w/Δ_DC` (or the coordinate along a fixed AN direction),
//! and gains scaled by `Δ_DC/σ̄_B` so that Bob's noise is 1.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::channel::{ChannelState, RoomScenario};
use crate::kernel::{
    self, Affine, Constraint, ConvexProgram, LinForm, Objective, Quadratic, SolveStatus, Tolerances,
};
use crate::math::{abs, dot, log2, norm2_sq, norm_inf, rel_change, sqrt};
use crate::metrics::{self, PrecoderSolution};
use crate::{Error, Result, PI_E};

/// Parameters of the unknown-CSI designs.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    /// Minimum SINR of Bob's link (linear).
    pub delta_b: f64,
    /// Minimum AN power `‖w‖²` in A².
    pub p_th: f64,
    /// AN power knob the floor was derived from, kept for reporting.
    pub rho: f64,
    pub eps_dinkelbach: f64,
    pub eps_ccp: f64,
    pub max_iter_dinkelbach: usize,
    pub max_iter_ccp: usize,
    pub tol: Tolerances,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            delta_b: 1.0,
            p_th: 0.0,
            rho: 0.0,
            eps_dinkelbach: 1e-3,
            eps_ccp: 1e-3,
            max_iter_dinkelbach: 30,
            max_iter_ccp: 50,
            tol: Tolerances::default(),
        }
    }
}

impl DesignConfig {
    /// Sets `P_th = (N_T − 1)(ρ·I_DC)²`.
    pub fn from_rho(rho: f64, delta_b: f64, scenario: &RoomScenario) -> Self {
        let n = scenario.n_tx() as f64 - 1.0;
        let p = rho * scenario.dc_bias;
        Self {
            delta_b,
            p_th: n * p * p,
            rho,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_dinkelbach > 0.0 && self.eps_ccp > 0.0) {
            return Err(Error::Domain("convergence tolerances must be positive"));
        }
        if !(self.delta_b >= 0.0 && self.p_th >= 0.0) {
            return Err(Error::Domain(
                "SINR threshold and AN floor must be non-negative",
            ));
        }
        if self.max_iter_dinkelbach == 0 || self.max_iter_ccp == 0 {
            return Err(Error::Domain("iteration limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStatus {
    Solved,
    Infeasible,
}

/// Result of one design run, with the iteration history.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub status: DesignStatus,
    pub sol: PrecoderSolution,
    pub ee_bob: f64,
    /// Min-SEE over the channel's Eves evaluated at `sol`, when there are any.
    pub resultant_see: Option<f64>,
    pub dinkelbach_iters: usize,
    pub ccp_iters_per_stage: Vec<usize>,
    /// `λ⁽⁰⁾ = 0, λ⁽¹⁾, …`
    pub lambda_trace: Vec<f64>,
    /// `C_B − λ⁽ⁱ⁻¹⁾·P` after each outer iteration.
    pub dinkelbach_errors: Vec<f64>,
    /// Largest relative change of the iterates, per CCP iteration, per stage.
    pub ccp_errors: Vec<Vec<f64>>,
}

impl DesignOutcome {
    fn infeasible(channel: &ChannelState, an_columns: usize) -> Self {
        Self {
            status: DesignStatus::Infeasible,
            sol: PrecoderSolution::zeros(channel, an_columns),
            ee_bob: 0.0,
            resultant_see: None,
            dinkelbach_iters: 0,
            ccp_iters_per_stage: Vec::new(),
            lambda_trace: Vec::new(),
            dinkelbach_errors: Vec::new(),
            ccp_errors: Vec::new(),
        }
    }

    fn solved(scenario: &RoomScenario, channel: &ChannelState, sol: PrecoderSolution) -> Self {
        let ee_bob = metrics::ee_bob(scenario, channel, &sol);
        let resultant_see = metrics::min_see(scenario, channel, &sol).ok();
        Self {
            status: DesignStatus::Solved,
            sol,
            ee_bob,
            resultant_see,
            dinkelbach_iters: 0,
            ccp_iters_per_stage: Vec::new(),
            lambda_trace: Vec::new(),
            dinkelbach_errors: Vec::new(),
            ccp_errors: Vec::new(),
        }
    }
}

/// Subspace the AN precoder is restricted to.
#[derive(Debug, Clone, PartialEq)]
pub enum AnBasis {
    /// `w` is free.
    Free,
    /// `w = √φ·w̃` with `w̃ = zf_basis(h̄_B)`.
    ZeroForcing,
    /// No AN.
    None,
}

/// Normalised parametric problem shared by every CCP stage of one design.
#[derive(Debug, Clone)]
pub struct StageProblem {
    /// `h_B·Δ/σ̄_B`.
    a: Vec<f64>,
    /// AN basis columns, each of length `n_w`.
    cols: Vec<Vec<f64>>,
    /// `colsᵀ h̄_B·Δ/σ̄_B`.
    jb: Vec<f64>,
    n_w: usize,
    interference: bool,
    delta_b: f64,
    /// `P_th/Δ²`.
    pt: f64,
    /// `ζΔ²`.
    zeta_d2: f64,
    /// Static power.
    p0: f64,
    delta: f64,
    tol: Tolerances,
}

/// Normalised precoders: `x = v/Δ` and the AN basis coordinates `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Converged CCP stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    pub point: StagePoint,
    pub iterations: usize,
    /// Largest relative change per iteration.
    pub errors: Vec<f64>,
    /// `C_B − λ·P` at every iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    /// `|c_B,1 − log₂(2p_B,1 + πe)|` at the last subproblem.
    pub slack_gap: f64,
}

impl StageProblem {
    pub fn new(
        channel: &ChannelState,
        scenario: &RoomScenario,
        cfg: &DesignConfig,
        basis: &AnBasis,
    ) -> Self {
        let delta = scenario.delta_dc();
        let scale = delta / sqrt(channel.bob.noise_norm);
        let a: Vec<f64> = channel.bob.info.iter().map(|h| h * scale).collect();
        let j: Vec<f64> = channel.bob.jam.iter().map(|h| h * scale).collect();
        let n_w = j.len();
        let cols: Vec<Vec<f64>> = match basis {
            AnBasis::Free => (0..n_w)
                .map(|i| {
                    let mut e = vec![0.0; n_w];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            AnBasis::ZeroForcing => vec![zf_basis(&channel.bob.jam)],
            AnBasis::None => Vec::new(),
        };
        let jb: Vec<f64> = cols.iter().map(|c| dot(c, &j)).collect();
        let jmax = j.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
        let interference = jb.iter().any(|v| abs(*v) > 1e-9 * jmax.max(1e-300));
        Self {
            a,
            cols,
            jb,
            n_w,
            interference,
            delta_b: cfg.delta_b,
            pt: cfg.p_th / (delta * delta),
            zeta_d2: scenario.power.zeta * delta * delta,
            p0: metrics::static_power(scenario),
            delta,
            tol: cfg.tol,
        }
    }

    fn nx(&self) -> usize {
        self.a.len()
    }

    fn ny(&self) -> usize {
        self.cols.len()
    }

    fn signal(&self, p: &StagePoint) -> f64 {
        let s = dot(&self.a, &p.x);
        s * s
    }

    fn interf(&self, p: &StagePoint) -> f64 {
        if self.ny() == 0 {
            return 0.0;
        }
        let i = dot(&self.jb, &p.y);
        i * i
    }

    /// Bob's rate lower bound (unclamped).
    pub fn rate(&self, p: &StagePoint) -> f64 {
        metrics::rate_lower_raw(self.signal(p), self.interf(p), 1.0)
    }

    pub fn power(&self, p: &StagePoint) -> f64 {
        self.p0 + self.zeta_d2 * (norm2_sq(&p.x) + norm2_sq(&p.y))
    }

    /// Largest `‖w‖²/Δ²` the basis allows.
    fn max_an_power(&self) -> f64 {
        match self.cols.len() {
            0 => 0.0,
            1 => {
                let m = norm_inf(&self.cols[0]);
                1.0 / (m * m)
            }
            n => n as f64,
        }
    }

    fn an_vector(&self, y: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.n_w];
        for (c, yc) in self.cols.iter().zip(y) {
            for (wi, ci) in w.iter_mut().zip(c) {
                *wi += ci * yc;
            }
        }
        w
    }

    /// `true` if `p` satisfies every constraint of the original problem within `tol`.
    pub fn satisfies(&self, p: &StagePoint, tol: f64) -> bool {
        let s = self.signal(p);
        let i = self.interf(p);
        let w = self.an_vector(&p.y);
        norm_inf(&p.x) <= 1.0 + tol
            && norm_inf(&w) <= 1.0 + tol
            && s >= self.delta_b * (i + 1.0) * (1.0 - tol) - tol
            && norm2_sq(&w) >= self.pt * (1.0 - tol) - tol
    }

    fn to_solution(&self, scheme: crate::channel::SchemeKind, p: &StagePoint) -> PrecoderSolution {
        let info = p.x.iter().map(|v| v * self.delta).collect();
        let an = if self.ny() == 0 {
            Vec::new()
        } else {
            vec![self
                .an_vector(&p.y)
                .into_iter()
                .map(|v| v * self.delta)
                .collect()]
        };
        PrecoderSolution::new(scheme, info, an)
    }

    /// Builds the convex restriction around `(xp, yp)` with interference auxiliary `q2p`.
    fn program(&self, lambda: f64, xp: &StagePoint, q2p: f64) -> ConvexProgram {
        let (nx, ny) = (self.nx(), self.ny());
        let c1 = nx + ny;
        let q1 = c1 + 1;
        let (c2, q2) = (q1 + 1, q1 + 2);
        let n = if self.interference { q1 + 3 } else { q1 + 1 };

        let mut lin = LinForm::var(c1, 0.5);
        if self.interference {
            lin.push(c2, -0.5);
        }
        let mut quad = Quadratic::new();
        let wq = lambda * self.zeta_d2;
        if wq > 0.0 {
            for i in 0..nx + ny {
                quad.push(wq, LinForm::var(i, 1.0));
            }
        }
        let ax = LinForm::dense(&self.a, 0);
        let jy = LinForm::dense(&self.jb, nx);
        let sp = dot(&self.a, &xp.x);
        let ip = if ny > 0 { dot(&self.jb, &xp.y) } else { 0.0 };

        let mut cons = Vec::new();
        cons.push(Constraint::concave_log(
            LinForm::var(c1, 1.0).into(),
            1.0,
            Affine::new(LinForm::var(q1, 2.0), PI_E),
        ));
        let mut lin_q1 = LinForm::var(q1, 1.0);
        for (i, ai) in self.a.iter().enumerate() {
            lin_q1.push(i, -2.0 * sp * ai);
        }
        if self.interference {
            for (k, jk) in self.jb.iter().enumerate() {
                lin_q1.push(nx + k, -2.0 * ip * jk);
            }
        }
        cons.push(Constraint::linear(lin_q1, -sp * sp - ip * ip));
        if self.interference {
            let u = q2p / 3.0 + 1.0;
            let slope = 1.0 / (3.0 * LN_2 * u);
            cons.push(Constraint::linear(
                LinForm::var(c2, -1.0).with(q2, slope),
                -log2(PI_E * u) + slope * q2p,
            ));
            cons.push(Constraint::quad(
                Quadratic::new().with(1.0, jy.clone()),
                LinForm::var(q2, -1.0),
                0.0,
            ));
        }
        if self.delta_b > 0.0 {
            let rt = sqrt(self.delta_b);
            if self.interference {
                cons.push(Constraint::soc(
                    vec![jy.into(), Affine::constant(1.0)],
                    ax.scaled(1.0 / rt).into(),
                ));
            } else {
                cons.push(Constraint::linear(ax.scaled(-1.0), -rt));
            }
        } else {
            cons.push(Constraint::linear(ax.scaled(-1.0), 0.0));
        }
        if self.pt > 0.0 && ny > 0 {
            let mut g = LinForm::new();
            for (k, yk) in xp.y.iter().enumerate() {
                g.push(nx + k, -2.0 * yk);
            }
            cons.push(Constraint::linear(g, -self.pt - norm2_sq(&xp.y)));
        }
        for i in 0..nx {
            cons.push(Constraint::linear(LinForm::var(i, 1.0), 1.0));
            cons.push(Constraint::linear(LinForm::var(i, -1.0), 1.0));
        }
        for row in 0..self.n_w {
            let mut f = LinForm::new();
            for (k, c) in self.cols.iter().enumerate() {
                if c[row] != 0.0 {
                    f.push(nx + k, c[row]);
                }
            }
            if !f.terms.is_empty() {
                cons.push(Constraint::linear(f.clone(), 1.0));
                cons.push(Constraint::linear(f.scaled(-1.0), 1.0));
            }
        }

        let mut start = Vec::with_capacity(n);
        start.extend_from_slice(&xp.x);
        start.extend_from_slice(&xp.y);
        let s = sp * sp + ip * ip;
        let q1s = s - 1e-3 * (1.0 + s);
        start.push(log2(2.0 * q1s + PI_E) - 1e-3);
        start.push(q1s);
        if self.interference {
            let q2s = ip * ip + 1e-3 * (1.0 + ip * ip);
            let u = q2p / 3.0 + 1.0;
            start.push(log2(PI_E * u) + (q2s - q2p) / (3.0 * LN_2 * u) + 1e-3);
            start.push(q2s);
        }
        ConvexProgram::new(n, Objective::new(lin, quad), cons).with_start(start)
    }

    /// `C_B − λ·P` at `p`.
    pub fn parametric(&self, lambda: f64, p: &StagePoint) -> f64 {
        self.rate(p) - lambda * self.power(p)
    }
}

/// Runs the convex-concave procedure for one Dinkelbach parameter `λ`.
///
/// Stops when the relative changes of `x`, `y` and the interference
/// auxiliary are all at most `ε₂`, or after `L_CCP` subproblems. Each
/// iterate is feasible for the next subproblem, so `C_B − λP` never drops.
pub fn ccp_stage(
    problem: &StageProblem,
    cfg: &DesignConfig,
    lambda: f64,
    start: &StagePoint,
) -> Result<Option<StageResult>> {
    let (nx, ny) = (problem.nx(), problem.ny());
    let mut cur = start.clone();
    let mut q2p = problem.interf(&cur);
    let mut errors = Vec::new();
    let mut trace = vec![problem.parametric(lambda, &cur)];
    let mut slack_gap = 0.0;
    let mut iters = 0;
    while iters < cfg.max_iter_ccp {
        let prog = problem.program(lambda, &cur, q2p);
        let rep = kernel::solve(&prog, &problem.tol)?;
        if rep.status == SolveStatus::Infeasible {
            return Ok(None);
        }
        iters += 1;
        let next = StagePoint {
            x: rep.x[..nx].to_vec(),
            y: rep.x[nx..nx + ny].to_vec(),
        };
        let q2 = if problem.interference {
            rep.x[nx + ny + 3]
        } else {
            0.0
        };
        let q1 = rep.x[nx + ny + 1];
        slack_gap = abs(rep.x[nx + ny] - log2(2.0 * q1 + PI_E));
        let err = rel_change(&next.x, &cur.x, 1e-3)
            .max(rel_change(&next.y, &cur.y, 1e-3))
            .max(abs(q2 - q2p) / abs(q2).max(1.0));
        errors.push(err);
        let value = problem.parametric(lambda, &next);
        if value < *trace.last().unwrap() - 1e-9 * (1.0 + abs(value)) {
            // Rounding in the subproblem; the incumbent is kept.
            break;
        }
        trace.push(value);
        cur = next;
        q2p = q2;
        if err <= cfg.eps_ccp {
            break;
        }
    }
    Ok(Some(StageResult {
        point: cur,
        iterations: iters,
        errors,
        objective_trace: trace,
        slack_gap,
    }))
}

/// Dinkelbach iterations on `C_B/P`, each stage solved by [`ccp_stage`]
/// warm-started from the previous stage.
pub fn dinkelbach_ee(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
    basis: &AnBasis,
    start: Option<StagePoint>,
) -> Result<DesignOutcome> {
    cfg.validate()?;
    let problem = StageProblem::new(channel, scenario, cfg, basis);
    let an_cols = usize::from(problem.ny() > 0);
    let start = match start {
        Some(s) => s,
        None => match p2_start(&problem) {
            Some(s) => s,
            None => return Ok(DesignOutcome::infeasible(channel, an_cols)),
        },
    };
    if problem.a.iter().all(|a| *a == 0.0) {
        // No data reaches Bob: C_B ≤ 0 everywhere, so spend nothing on v.
        let y = if problem.pt > 0.0 {
            start.y
        } else {
            vec![0.0; problem.ny()]
        };
        let cur = StagePoint {
            x: vec![0.0; problem.nx()],
            y,
        };
        let mut out =
            DesignOutcome::solved(scenario, channel, problem.to_solution(channel.scheme, &cur));
        out.lambda_trace = vec![0.0];
        return Ok(out);
    }
    let mut lambda = 0.0;
    let mut cur = start;
    let mut lambdas = vec![0.0];
    let mut din_err = Vec::new();
    let mut ccp_iters = Vec::new();
    let mut ccp_errors = Vec::new();
    for _ in 0..cfg.max_iter_dinkelbach {
        let stage = match ccp_stage(&problem, cfg, lambda, &cur)? {
            Some(s) => s,
            None if lambdas.len() == 1 => return Ok(DesignOutcome::infeasible(channel, an_cols)),
            None => break,
        };
        ccp_iters.push(stage.iterations);
        ccp_errors.push(stage.errors);
        let c = problem.rate(&stage.point);
        let d = problem.power(&stage.point);
        let f = c - lambda * d;
        din_err.push(f.max(0.0));
        if lambdas.len() > 1 && c / d < lambda {
            // Rounding below the incumbent ratio: keep the incumbent.
            break;
        }
        cur = stage.point;
        lambda = c / d;
        lambdas.push(lambda);
        if f <= cfg.eps_dinkelbach {
            break;
        }
    }
    if dot(&problem.a, &cur.x) < 0.0 {
        cur.x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut sol = problem.to_solution(channel.scheme, &cur);
    sol.zero_forcing = matches!(basis, AnBasis::ZeroForcing);
    let mut out = DesignOutcome::solved(scenario, channel, sol);
    out.dinkelbach_iters = ccp_iters.len();
    out.ccp_iters_per_stage = ccp_iters;
    out.lambda_trace = lambdas;
    out.dinkelbach_errors = din_err;
    out.ccp_errors = ccp_errors;
    Ok(out)
}

/// Finds a point satisfying the SINR floor, the AN floor and the amplitude
/// limits, or `None` when the checks below rule the problem out.
fn p2_start(problem: &StageProblem) -> Option<StagePoint> {
    let nx = problem.nx();
    let x = vec![1.0; nx];
    let s = problem.signal(&StagePoint {
        x: x.clone(),
        y: Vec::new(),
    });
    if problem.delta_b > s || problem.pt > problem.max_an_power() * (1.0 - 1e-12) {
        return None;
    }
    let ny = problem.ny();
    if ny == 0 {
        return Some(StagePoint { x, y: Vec::new() });
    }
    // Allowed interference power at the strongest signal.
    let room = if problem.delta_b > 0.0 {
        s / problem.delta_b - 1.0
    } else {
        f64::INFINITY
    };
    let ok = |y: &[f64]| {
        let p = StagePoint {
            x: x.clone(),
            y: y.to_vec(),
        };
        let w = problem.an_vector(y);
        norm_inf(&w) <= 1.0 && norm2_sq(&w) > problem.pt && problem.interf(&p) < room
    };
    let target = sqrt(problem.pt.max(1e-12 * problem.max_an_power()));
    let grow = 1.0 + 1e-3;
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if ny == 1 {
        let cap = 1.0 / norm_inf(&problem.cols[0]);
        candidates.push(vec![(target * grow).min(cap)]);
    } else {
        candidates.push(vec![(target * grow / sqrt(ny as f64)).min(1.0); ny]);
        let d = zf_basis(&problem.jb);
        let m = norm_inf(&d);
        candidates.push(d.iter().map(|v| v * (target * grow).min(1.0 / m)).collect());
    }
    for y in &candidates {
        if ok(y) {
            return Some(StagePoint {
                x: x.clone(),
                y: y.clone(),
            });
        }
    }
    if ny == 1 || !room.is_finite() {
        return None;
    }
    // Maximise ‖y‖² over the box and the interference slab by successive linearisation.
    let bound = sqrt(room) * (1.0 - 1e-9);
    let mut y = candidates.pop().unwrap();
    for _ in 0..20 {
        let mut cons = Vec::new();
        for i in 0..ny {
            cons.push(Constraint::linear(LinForm::var(i, 1.0), 1.0));
            cons.push(Constraint::linear(LinForm::var(i, -1.0), 1.0));
        }
        let jy = LinForm::dense(&problem.jb, 0);
        cons.push(Constraint::linear(jy.clone(), bound));
        cons.push(Constraint::linear(jy.scaled(-1.0), bound));
        let prog = ConvexProgram::new(ny, Objective::linear(LinForm::dense(&y, 0)), cons)
            .with_start(y.iter().map(|v| v * (1.0 - 1e-6)).collect());
        let rep = kernel::solve(&prog, &problem.tol).ok()?;
        if rep.status == SolveStatus::Infeasible {
            return None;
        }
        let gain = norm2_sq(&rep.x) - norm2_sq(&y);
        y = rep.x;
        if ok(&y) {
            return Some(StagePoint { x, y });
        }
        if gain <= 1e-12 {
            break;
        }
    }
    None
}

/// General design: Bob's EE under the SINR and AN-power floors.
pub fn general_design(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
) -> Result<DesignOutcome> {
    dinkelbach_ee(channel, scenario, cfg, &AnBasis::Free, None)
}

/// EE-optimal design without AN (`w = 0`).
///
/// SISO uses the closed-form stationarity condition on `V = v²` with no AN
/// power; MISO runs the Dinkelbach/CCP loop with no AN variables.
pub fn solve_p1_noan(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
) -> Result<DesignOutcome> {
    let open = DesignConfig {
        delta_b: 0.0,
        p_th: 0.0,
        ..cfg.clone()
    };
    if channel.scheme.is_siso() {
        let h = channel.bob.info[0];
        let delta = scenario.delta_dc();
        let v = optimal_v_squared(h, channel.bob.noise_norm, scenario, 0.0, 0.0, delta * delta);
        let sol = PrecoderSolution::new(channel.scheme, vec![sqrt(v)], Vec::new());
        return Ok(DesignOutcome::solved(scenario, channel, sol));
    }
    dinkelbach_ee(channel, scenario, &open, &AnBasis::None, None)
}

/// Unit vector spanning the projection of `1` onto the null space of `h̄ᵀ`.
///
/// Falls back to projecting `e₁`, then `e₂`, when `1` is parallel to `h̄`.
pub fn zf_basis(h_bar: &[f64]) -> Vec<f64> {
    let n = h_bar.len();
    let hh = norm2_sq(h_bar);
    let project = |u: &[f64]| -> Vec<f64> {
        if hh == 0.0 {
            return u.to_vec();
        }
        let c = dot(h_bar, u) / hh;
        u.iter().zip(h_bar).map(|(ui, hi)| ui - c * hi).collect()
    };
    let ones = vec![1.0; n];
    let mut p = project(&ones);
    let mut k = 0;
    while sqrt(norm2_sq(&p)) < 1e-9 && k < n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        p = project(&e);
        k += 1;
    }
    let norm = sqrt(norm2_sq(&p));
    p.iter().map(|v| v / norm).collect()
}

/// `f(V)` whose sign is that of `dΦ_B/dV` at fixed AN power.
pub fn zf_stationarity(v: f64, a: f64, b: f64, zeta: f64) -> f64 {
    let g = 1.0 + a * v;
    a * (b + 2.0 * zeta * v) / (LN_2 * g) - 2.0 * zeta * log2(g)
}

/// Maximiser of `½log₂(1 + aV)/(P_static + ζ(φ + V))` over `V ∈ [lo, hi]`.
fn optimal_v_squared(
    h: f64,
    noise: f64,
    scenario: &RoomScenario,
    phi: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let a = 2.0 * h * h / (PI_E * noise);
    let zeta = scenario.power.zeta;
    let b = 2.0 * (metrics::static_power(scenario) + zeta * phi);
    let f = |v: f64| zf_stationarity(v, a, b, zeta);
    if f(hi) > 0.0 {
        return hi;
    }
    if f(lo) < 0.0 {
        return lo;
    }
    let (mut l, mut r) = (lo, hi);
    loop {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        if f(m) >= 0.0 {
            l = m;
        } else {
            r = m;
        }
    }
    0.5 * (l + r)
}

/// `V* = v*²` and the resulting EE of the SISO zero-forcing design at AN power `φ`.
pub fn zf_optimal_v(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
    phi: f64,
) -> Result<Option<(f64, f64)>> {
    if !channel.scheme.is_siso() {
        return Err(Error::Domain(
            "the scalar zero-forcing design needs a SISO scheme",
        ));
    }
    let h = channel.bob.info[0];
    let noise = channel.bob.noise_norm;
    let delta = scenario.delta_dc();
    let w = zf_basis(&channel.bob.jam);
    let m = norm_inf(&w);
    let lo = if cfg.delta_b > 0.0 {
        cfg.delta_b * noise / (h * h)
    } else {
        0.0
    };
    if h == 0.0 || lo > delta * delta || phi > delta * delta / (m * m) {
        return Ok(None);
    }
    let v = optimal_v_squared(h, noise, scenario, phi, lo, delta * delta);
    let a = 2.0 * h * h / (PI_E * noise);
    let p = metrics::static_power(scenario) + scenario.power.zeta * (phi + v);
    Ok(Some((v, 0.5 * log2(1.0 + a * v) / p)))
}

/// Zero-forcing SISO design: `φ* = P_th`, `V*` from the stationarity condition.
pub fn zf_siso(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
) -> Result<DesignOutcome> {
    cfg.validate()?;
    let Some((v, _)) = zf_optimal_v(channel, scenario, cfg, cfg.p_th)? else {
        return Ok(DesignOutcome::infeasible(channel, 1));
    };
    let w = zf_basis(&channel.bob.jam);
    let r = sqrt(cfg.p_th);
    let mut sol = PrecoderSolution::new(
        channel.scheme,
        vec![sqrt(v)],
        vec![w.iter().map(|c| c * r).collect()],
    );
    sol.zero_forcing = true;
    Ok(DesignOutcome::solved(scenario, channel, sol))
}

/// Zero-forcing MISO design: AN along `w̃`, `(v, φ)` from Dinkelbach/CCP.
pub fn zf_miso(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
) -> Result<DesignOutcome> {
    dinkelbach_ee(channel, scenario, cfg, &AnBasis::ZeroForcing, None)
}

/// Dispatches to [`zf_siso`] or [`zf_miso`].
pub fn zf_design(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &DesignConfig,
) -> Result<DesignOutcome> {
    if channel.scheme.is_siso() {
        zf_siso(channel, scenario, cfg)
    } else {
        zf_miso(channel, scenario, cfg)
    }
}
