//! Max-min secrecy energy efficiency when every Eve's channel is known.
//!
//! For a fixed target `t` the question "is there a precoder whose weakest
//! secrecy rate covers `t` times its consumed power?" is answered by a
//! convex-concave procedure that maximises the worst margin
//! `min_k (C_B − C_E,k) − t·P`. Bisection on `t` then finds the largest
//! target that can be met.
//!
//! Inside the procedure every receiver works in its own noise units: the
//! gains are scaled by `Δ_DC/σ̄_R`, which leaves every rate unchanged.

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

/// Margin (bits/s/Hz) above which a target is declared reachable.
pub const MARGIN_TOL: f64 = 1e-8;

const MAX_ASCENT: usize = 10;

/// Parameters of the max-min design.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinConfig {
    /// Lower end of the bracket, checked before use; `None` keeps the
    /// efficiency reached by the ascent.
    pub t_low: Option<f64>,
    /// First upper end to try; it is doubled away from `t_low` while it is
    /// still feasible. `None` starts `2ε₃` above `t_low` and stops at
    /// `C_B,max / P_static`, which no precoder reaches.
    pub t_high: Option<f64>,
    pub eps_bisect: f64,
    pub eps_ccp: f64,
    pub max_iter_ccp: usize,
    /// Number of Eves taken into account, `None` for all of them.
    pub k_eves: Option<usize>,
    /// Transmit one AN column per Eve.
    pub with_an: bool,
    pub tol: Tolerances,
}

impl Default for MaxMinConfig {
    fn default() -> Self {
        Self {
            t_low: None,
            t_high: None,
            eps_bisect: 1e-3,
            eps_ccp: 1e-3,
            max_iter_ccp: 50,
            k_eves: None,
            with_an: true,
            tol: Tolerances::default(),
        }
    }
}

impl MaxMinConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_bisect > 0.0 && self.eps_ccp > 0.0) {
            return Err(Error::Domain("convergence tolerances must be positive"));
        }
        if self.max_iter_ccp == 0 {
            return Err(Error::Domain("iteration limits must be positive"));
        }
        if let (Some(lo), Some(hi)) = (self.t_low, self.t_high) {
            if !(lo < hi) {
                return Err(Error::Domain("need t_low < t_high"));
            }
        }
        if self.t_low.map_or(false, |t| !(t >= 0.0)) || self.t_high.map_or(false, |t| !(t > 0.0)) {
            return Err(Error::Domain("bisection bracket must be non-negative"));
        }
        if self.k_eves == Some(0) {
            return Err(Error::Domain("at least one eavesdropper is required"));
        }
        Ok(())
    }
}

/// Outcome of [`p12_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub sol: PrecoderSolution,
    /// `min_k (C_B − C_E,k) − t·P` at `sol`.
    pub margin: f64,
    pub iterations: usize,
    /// Margin at the start and after every accepted iterate.
    pub margin_trace: Vec<f64>,
    /// Largest relative change of the iterates, per iteration.
    pub errors: Vec<f64>,
}

/// Outcome of [`maxmin_see`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinOutcome {
    pub sol: PrecoderSolution,
    /// Largest target certified feasible.
    pub t_star: f64,
    /// Min-SEE of `sol`, unclamped.
    pub min_see: f64,
    /// Bracket handed to the bisection.
    pub bracket: (f64, f64),
    pub bisection_steps: usize,
    /// Every tested target with its verdict, in order, bracketing included.
    pub trace: Vec<(f64, bool)>,
    /// CCP iterations of every run, ascent and bracketing included.
    pub ccp_iterations: Vec<usize>,
}

/// Normalised precoders: `x = v/Δ` and one AN column `u_k = w_k/Δ` per Eve.
#[derive(Debug, Clone, PartialEq)]
struct Point {
    x: Vec<f64>,
    u: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct Receiver {
    info: Vec<f64>,
    jam: Vec<f64>,
}

impl Receiver {
    fn new(rx: &crate::channel::ReceiverChannel, delta: f64) -> Self {
        let s = delta / sqrt(rx.noise_norm);
        Self {
            info: rx.info.iter().map(|h| h * s).collect(),
            jam: rx.jam.iter().map(|h| h * s).collect(),
        }
    }

    fn powers(&self, p: &Point) -> (f64, f64) {
        let s = dot(&self.info, &p.x);
        (
            s * s,
            p.u.iter()
                .map(|c| {
                    let i = dot(&self.jam, c);
                    i * i
                })
                .sum(),
        )
    }
}

/// Variable layout of one convexified subproblem.
#[derive(Debug, Clone, Copy)]
struct Layout {
    nx: usize,
    nw: usize,
    k: usize,
    an: bool,
}

impl Layout {
    fn cols(&self) -> usize {
        if self.an {
            self.k
        } else {
            0
        }
    }
    /// Row-sum auxiliaries are needed only with several AN columns.
    fn rows_aux(&self) -> bool {
        self.cols() > 1
    }
    fn u(&self, col: usize, n: usize) -> usize {
        self.nx + col * self.nw + n
    }
    fn r(&self, col: usize, n: usize) -> usize {
        self.nx + self.cols() * self.nw + col * self.nw + n
    }
    fn base(&self) -> usize {
        self.nx + self.cols() * self.nw * if self.rows_aux() { 2 } else { 1 }
    }
    fn bob(&self) -> usize {
        if self.an {
            4
        } else {
            2
        }
    }
    fn cb1(&self) -> usize {
        self.base()
    }
    fn qb1(&self) -> usize {
        self.base() + 1
    }
    fn cb2(&self) -> usize {
        self.base() + 2
    }
    fn qb2(&self) -> usize {
        self.base() + 3
    }
    fn eve(&self, k: usize) -> usize {
        self.base() + self.bob() + k * self.bob()
    }
    fn ce1(&self, k: usize) -> usize {
        self.eve(k)
    }
    fn qe1(&self, k: usize) -> usize {
        self.eve(k) + 1
    }
    fn ce2(&self, k: usize) -> usize {
        self.eve(k) + 2
    }
    fn qe2(&self, k: usize) -> usize {
        self.eve(k) + 3
    }
    fn s(&self) -> usize {
        self.eve(self.k)
    }
    fn n(&self) -> usize {
        self.s() + 1
    }
}

/// Tangent of `log₂(πe(q/3 + 1))` at `qp` as `(value, slope)`.
fn tangent(qp: f64) -> (f64, f64) {
    let u = qp / 3.0 + 1.0;
    (log2(PI_E * u), 1.0 / (3.0 * LN_2 * u))
}

#[derive(Debug, Clone)]
struct MarginProblem {
    bob: Receiver,
    eves: Vec<Receiver>,
    layout: Layout,
    zeta_d2: f64,
    p0: f64,
    delta: f64,
    tol: Tolerances,
}

#[derive(Debug, Clone)]
struct CcpRun {
    point: Point,
    margin: f64,
    iterations: usize,
    trace: Vec<f64>,
    errors: Vec<f64>,
}

impl MarginProblem {
    fn new(channel: &ChannelState, scenario: &RoomScenario, cfg: &MaxMinConfig) -> Self {
        let delta = scenario.delta_dc();
        let bob = Receiver::new(&channel.bob, delta);
        let eves: Vec<Receiver> = channel
            .eves
            .iter()
            .map(|e| Receiver::new(e, delta))
            .collect();
        let layout = Layout {
            nx: bob.info.len(),
            nw: bob.jam.len(),
            k: eves.len(),
            an: cfg.with_an,
        };
        Self {
            bob,
            eves,
            layout,
            zeta_d2: scenario.power.zeta * delta * delta,
            p0: metrics::static_power(scenario),
            delta,
            tol: cfg.tol,
        }
    }

    fn power(&self, p: &Point) -> f64 {
        self.p0 + self.zeta_d2 * (norm2_sq(&p.x) + p.u.iter().map(|c| norm2_sq(c)).sum::<f64>())
    }

    fn worst_secrecy(&self, p: &Point) -> f64 {
        let (s, i) = self.bob.powers(p);
        let cb = metrics::rate_lower_raw(s, i, 1.0);
        self.eves
            .iter()
            .map(|e| {
                let (s, i) = e.powers(p);
                cb - metrics::rate_upper_raw(s, i, 1.0)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn margin(&self, t: f64, p: &Point) -> f64 {
        self.worst_secrecy(p) - t * self.power(p)
    }

    /// `C_B,max / P_static`: Bob's best rate with no AN over the least power.
    fn see_bound(&self) -> f64 {
        let s: f64 = self.bob.info.iter().map(|a| abs(*a)).sum();
        metrics::rate_lower_raw(s * s, 0.0, 1.0) / self.p0
    }

    /// Information precoder at half amplitude along Bob's channel, and each
    /// AN column in Bob's null space pointed at its Eve.
    fn initial_point(&self) -> Point {
        let l = self.layout;
        let a = &self.bob.info;
        let am = norm_inf(a);
        let x = if am > 0.0 {
            a.iter().map(|v| 0.5 * v / am).collect()
        } else {
            vec![0.5; l.nx]
        };
        let jb = &self.bob.jam;
        let jj = norm2_sq(jb);
        let u = (0..l.cols())
            .map(|k| {
                let g = &self.eves[k].jam;
                let c = if jj > 0.0 { dot(jb, g) / jj } else { 0.0 };
                let mut d: Vec<f64> = g.iter().zip(jb).map(|(gi, bi)| gi - c * bi).collect();
                if norm_inf(&d) <= 1e-9 * norm_inf(g).max(1e-300) {
                    d = g.clone();
                }
                if norm_inf(&d) == 0.0 {
                    d = crate::unknown_csi::zf_basis(jb);
                }
                let m = norm_inf(&d);
                d.iter().map(|v| 0.5 * v / (m * l.cols() as f64)).collect()
            })
            .collect();
        Point { x, u }
    }

    fn zero_point(&self) -> Point {
        let l = self.layout;
        Point {
            x: vec![0.0; l.nx],
            u: vec![vec![0.0; l.nw]; l.cols()],
        }
    }

    fn from_solution(&self, sol: &PrecoderSolution) -> Result<Point> {
        let l = self.layout;
        if sol.info.len() != l.nx
            || sol.an.len() != l.cols()
            || sol.an.iter().any(|c| c.len() != l.nw)
        {
            return Err(Error::Domain("start point does not match the channel"));
        }
        Ok(Point {
            x: sol.info.iter().map(|v| v / self.delta).collect(),
            u: sol
                .an
                .iter()
                .map(|c| c.iter().map(|v| v / self.delta).collect())
                .collect(),
        })
    }

    fn to_solution(&self, scheme: crate::channel::SchemeKind, p: &Point) -> PrecoderSolution {
        PrecoderSolution::new(
            scheme,
            p.x.iter().map(|v| v * self.delta).collect(),
            p.u.iter()
                .map(|c| c.iter().map(|v| v * self.delta).collect())
                .collect(),
        )
    }

    /// Linear form `jᵀu_col` on the AN variables.
    fn jam_form(&self, jam: &[f64], col: usize) -> LinForm {
        LinForm::dense(jam, self.layout.u(col, 0))
    }

    /// Margin maximisation around `p`, with every concave term replaced by
    /// its tangent at `p`.
    fn program(&self, t: f64, p: &Point) -> ConvexProgram {
        let l = self.layout;
        let cols = l.cols();
        let mut cons = Vec::new();
        let push_nonempty = |q: &mut Quadratic, f: LinForm| {
            if !f.terms.is_empty() {
                q.push(1.0, f);
            }
        };

        // Bob.
        let sp = dot(&self.bob.info, &p.x);
        let ib: Vec<f64> = p.u.iter().map(|c| dot(&self.bob.jam, c)).collect();
        cons.push(Constraint::concave_log(
            LinForm::var(l.cb1(), 1.0).into(),
            1.0,
            Affine::new(LinForm::var(l.qb1(), 2.0), PI_E),
        ));
        let mut lin = LinForm::var(l.qb1(), 1.0);
        for (i, ai) in self.bob.info.iter().enumerate() {
            if *ai != 0.0 {
                lin.push(i, -2.0 * sp * ai);
            }
        }
        for (col, ic) in ib.iter().enumerate() {
            for (n, jn) in self.bob.jam.iter().enumerate() {
                if *jn != 0.0 && *ic != 0.0 {
                    lin.push(l.u(col, n), -2.0 * ic * jn);
                }
            }
        }
        cons.push(Constraint::linear(lin, -sp * sp - norm2_sq(&ib)));
        if l.an {
            let (v, slope) = tangent(norm2_sq(&ib));
            cons.push(Constraint::linear(
                LinForm::var(l.cb2(), -1.0).with(l.qb2(), slope),
                -v + slope * norm2_sq(&ib),
            ));
            let mut q = Quadratic::new();
            for col in 0..cols {
                push_nonempty(&mut q, self.jam_form(&self.bob.jam, col));
            }
            cons.push(Constraint::quad(q, LinForm::var(l.qb2(), -1.0), 0.0));
        }

        // Eves.
        for (k, e) in self.eves.iter().enumerate() {
            let (se, ie) = e.powers(p);
            let (v, slope) = tangent(se + ie);
            cons.push(Constraint::linear(
                LinForm::var(l.ce1(k), -1.0).with(l.qe1(k), slope),
                -v + slope * (se + ie),
            ));
            let mut q = Quadratic::new();
            push_nonempty(&mut q, LinForm::dense(&e.info, 0));
            for col in 0..cols {
                push_nonempty(&mut q, self.jam_form(&e.jam, col));
            }
            cons.push(Constraint::quad(q, LinForm::var(l.qe1(k), -1.0), 0.0));
            if l.an {
                cons.push(Constraint::concave_log(
                    LinForm::var(l.ce2(k), 1.0).into(),
                    1.0,
                    Affine::new(LinForm::var(l.qe2(k), 2.0), PI_E),
                ));
                let mut lin = LinForm::var(l.qe2(k), 1.0);
                for (col, c) in p.u.iter().enumerate() {
                    let ic = dot(&e.jam, c);
                    if ic != 0.0 {
                        for (n, jn) in e.jam.iter().enumerate() {
                            if *jn != 0.0 {
                                lin.push(l.u(col, n), -2.0 * ic * jn);
                            }
                        }
                    }
                }
                cons.push(Constraint::linear(lin, -ie));
            }
        }

        // Margins.
        let wq = t * self.zeta_d2;
        let mut power = Quadratic::new();
        if wq > 0.0 {
            for i in 0..l.nx {
                power.push(wq, LinForm::var(i, 1.0));
            }
            for col in 0..cols {
                for n in 0..l.nw {
                    power.push(wq, LinForm::var(l.u(col, n), 1.0));
                }
            }
        }
        for k in 0..l.k {
            let mut lin = LinForm::var(l.s(), 1.0)
                .with(l.cb1(), -0.5)
                .with(l.ce1(k), 0.5);
            if l.an {
                lin.push(l.cb2(), 0.5);
                lin.push(l.ce2(k), -0.5);
            }
            cons.push(Constraint::quad(power.clone(), lin, -t * self.p0));
        }

        // Amplitudes.
        for i in 0..l.nx {
            cons.push(Constraint::linear(LinForm::var(i, 1.0), 1.0));
            cons.push(Constraint::linear(LinForm::var(i, -1.0), 1.0));
        }
        if l.rows_aux() {
            for n in 0..l.nw {
                let mut row = LinForm::new();
                for col in 0..cols {
                    cons.push(Constraint::linear(
                        LinForm::var(l.u(col, n), 1.0).with(l.r(col, n), -1.0),
                        0.0,
                    ));
                    cons.push(Constraint::linear(
                        LinForm::var(l.u(col, n), -1.0).with(l.r(col, n), -1.0),
                        0.0,
                    ));
                    row.push(l.r(col, n), 1.0);
                }
                cons.push(Constraint::linear(row, 1.0));
            }
        } else if cols == 1 {
            for n in 0..l.nw {
                cons.push(Constraint::linear(LinForm::var(l.u(0, n), 1.0), 1.0));
                cons.push(Constraint::linear(LinForm::var(l.u(0, n), -1.0), 1.0));
            }
        }

        ConvexProgram::new(l.n(), Objective::linear(LinForm::var(l.s(), 1.0)), cons)
            .with_start(self.start(t, p))
    }

    /// Interior guess: `p` with every auxiliary pulled slightly inside its bound.
    fn start(&self, t: f64, p: &Point) -> Vec<f64> {
        const M: f64 = 1e-3;
        let l = self.layout;
        let mut z = vec![0.0; l.n()];
        z[..l.nx].copy_from_slice(&p.x);
        for (col, c) in p.u.iter().enumerate() {
            for (n, v) in c.iter().enumerate() {
                z[l.u(col, n)] = *v;
            }
        }
        if l.rows_aux() {
            for n in 0..l.nw {
                let used: f64 = p.u.iter().map(|c| abs(c[n])).sum();
                let pad = if used < 1.0 {
                    (1.0 - used) / (2.0 * l.cols() as f64)
                } else {
                    M
                };
                for (col, c) in p.u.iter().enumerate() {
                    z[l.r(col, n)] = abs(c[n]) + pad;
                }
            }
        }
        let (sb, ib) = self.bob.powers(p);
        let qb1 = sb + ib - M * (1.0 + sb + ib);
        z[l.qb1()] = qb1;
        z[l.cb1()] = log2(2.0 * qb1 + PI_E) - M;
        let mut bob_part = 0.5 * z[l.cb1()];
        if l.an {
            let qb2 = ib + M * (1.0 + ib);
            let (v, slope) = tangent(ib);
            z[l.qb2()] = qb2;
            z[l.cb2()] = v + slope * (qb2 - ib) + M;
            bob_part -= 0.5 * z[l.cb2()];
        }
        let mut worst = f64::INFINITY;
        for (k, e) in self.eves.iter().enumerate() {
            let (se, ie) = e.powers(p);
            let q1 = se + ie + M * (1.0 + se + ie);
            let (v, slope) = tangent(se + ie);
            z[l.qe1(k)] = q1;
            z[l.ce1(k)] = v + slope * (q1 - se - ie) + M;
            let mut eve_part = 0.5 * z[l.ce1(k)];
            if l.an {
                let q2 = ie - M * (1.0 + ie);
                z[l.qe2(k)] = q2;
                z[l.ce2(k)] = log2(2.0 * q2 + PI_E) - M;
                eve_part -= 0.5 * z[l.ce2(k)];
            }
            worst = worst.min(bob_part - eve_part);
        }
        z[l.s()] = worst - t * self.power(p) - M;
        z
    }

    fn extract(&self, z: &[f64]) -> Point {
        let l = self.layout;
        Point {
            x: z[..l.nx].to_vec(),
            u: (0..l.cols())
                .map(|col| z[l.u(col, 0)..l.u(col, 0) + l.nw].to_vec())
                .collect(),
        }
    }

    /// Received powers whose tangents define the next subproblem.
    fn anchors(&self, p: &Point) -> Vec<f64> {
        let mut q = vec![self.bob.powers(p).1];
        q.extend(self.eves.iter().map(|e| {
            let (s, i) = e.powers(p);
            s + i
        }));
        q
    }

    /// Convex-concave iterations on the margin at target `t`.
    ///
    /// Each subproblem's tangents are taken at the current point, so the
    /// true margin never decreases. With `stop_when_feasible` the loop ends
    /// as soon as the margin reaches zero.
    fn run(
        &self,
        t: f64,
        start: Point,
        eps: f64,
        max_iter: usize,
        stop_when_feasible: bool,
    ) -> Result<CcpRun> {
        let mut cur = start;
        let mut margin = self.margin(t, &cur);
        let mut trace = vec![margin];
        let mut errors = Vec::new();
        let mut iterations = 0;
        let mut prev_gain = 0.0;
        let mut prev_ratio = 1.0;
        if stop_when_feasible && margin >= -MARGIN_TOL {
            return Ok(CcpRun {
                point: cur,
                margin,
                iterations,
                trace,
                errors,
            });
        }
        while iterations < max_iter {
            let rep = kernel::solve(&self.program(t, &cur), &self.tol)?;
            if rep.status == SolveStatus::Infeasible {
                break;
            }
            iterations += 1;
            let next = self.extract(&rep.x);
            let flat = |p: &Point| -> Vec<f64> { p.u.iter().flatten().copied().collect() };
            let (qa, qb) = (self.anchors(&next), self.anchors(&cur));
            let err = rel_change(&next.x, &cur.x, 1e-3)
                .max(rel_change(&flat(&next), &flat(&cur), 1.0))
                .max(
                    qa.iter()
                        .zip(&qb)
                        .map(|(a, b)| abs(a - b) / abs(*a).max(1.0))
                        .fold(0.0, f64::max),
                );
            errors.push(err);
            let value = self.margin(t, &next);
            if value < margin - 1e-9 * (1.0 + abs(value)) {
                break;
            }
            let gain = value - margin;
            cur = next;
            margin = value;
            trace.push(margin);
            // A negative margin that barely moves will not reach zero, nor,
            // once a positive target is being tested, will one whose
            // shrinking gains sum to less than the deficit with a factor of
            // two to spare. From a poor start at `t = 0` the gains can grow
            // late, so that run only stops on the first rule.
            let ratio = if prev_gain > 0.0 {
                gain / prev_gain
            } else {
                1.0
            };
            let shrink = ratio.max(prev_ratio);
            let stalled = margin < -MARGIN_TOL
                && (gain <= eps * abs(margin)
                    || (t > 0.0
                        && iterations >= 4
                        && shrink < 1.0
                        && margin + 2.0 * gain * shrink / (1.0 - shrink) < 0.0));
            prev_gain = gain;
            prev_ratio = ratio;
            if (stop_when_feasible && margin >= -MARGIN_TOL) || err <= eps || stalled {
                break;
            }
        }
        Ok(CcpRun {
            point: cur,
            margin,
            iterations,
            trace,
            errors,
        })
    }
}

fn restrict(channel: &ChannelState, cfg: &MaxMinConfig) -> Result<ChannelState> {
    let ch = match cfg.k_eves {
        Some(k) if k > channel.eves.len() => {
            return Err(Error::Domain("channel has fewer Eves than requested"))
        }
        Some(k) => channel.with_eves(k),
        None => channel.clone(),
    };
    if ch.eves.is_empty() {
        return Err(Error::Domain("at least one eavesdropper is required"));
    }
    Ok(ch)
}

/// Decides whether target `t` (bits/J/Hz) is reachable by running the
/// convex-concave procedure on the worst secrecy margin.
///
/// Starts from `start` when given, otherwise from the default initial point.
/// Feasible iff the margin at the final iterate is at least `-MARGIN_TOL`.
pub fn p12_feasible(
    channel: &ChannelState,
    scenario: &RoomScenario,
    t: f64,
    cfg: &MaxMinConfig,
    start: Option<&PrecoderSolution>,
) -> Result<Feasibility> {
    cfg.validate()?;
    if !(t >= 0.0) {
        return Err(Error::Domain("target efficiency must be non-negative"));
    }
    let ch = restrict(channel, cfg)?;
    let problem = MarginProblem::new(&ch, scenario, cfg);
    let start = match start {
        Some(s) => problem.from_solution(s)?,
        None => problem.initial_point(),
    };
    let run = problem.run(t, start, cfg.eps_ccp, cfg.max_iter_ccp, false)?;
    Ok(Feasibility {
        feasible: run.margin >= -MARGIN_TOL,
        sol: problem.to_solution(ch.scheme, &run.point),
        margin: run.margin,
        iterations: run.iterations,
        margin_trace: run.trace,
        errors: run.errors,
    })
}

/// Largest `t` such that every Eve's secrecy rate covers `t·P`, by bisection.
///
/// The lower end comes from a short ascent: the margin is maximised at the
/// efficiency of the current point until that efficiency stops rising. The
/// upper end is the first failing target on a doubling grid above it. Every
/// feasibility check is warm-started from the last feasible point and stops
/// as soon as the margin is non-negative.
///
/// With AN, the design without AN is solved as well and the better of the
/// two is returned, so adding AN columns never lowers the result.
pub fn maxmin_see(
    channel: &ChannelState,
    scenario: &RoomScenario,
    cfg: &MaxMinConfig,
) -> Result<MaxMinOutcome> {
    cfg.validate()?;
    let ch = restrict(channel, cfg)?;
    if !cfg.with_an {
        return bisect(&ch, scenario, cfg);
    }
    let with = bisect(&ch, scenario, cfg)?;
    let mut without = bisect(
        &ch,
        scenario,
        &MaxMinConfig {
            with_an: false,
            ..cfg.clone()
        },
    )?;
    if without.t_star > with.t_star {
        without.sol.an = vec![vec![0.0; ch.bob.jam.len()]; ch.eves.len()];
        return Ok(without);
    }
    Ok(with)
}

fn bisect(ch: &ChannelState, scenario: &RoomScenario, cfg: &MaxMinConfig) -> Result<MaxMinOutcome> {
    let problem = MarginProblem::new(ch, scenario, cfg);
    let see_of = |p: &Point| problem.worst_secrecy(p) / problem.power(p);
    let mut ccp_iterations = Vec::new();
    let mut trace = Vec::new();

    // Ascent: single convex-concave steps, each at the current point's own
    // efficiency, which the step can only raise. A start with negative
    // secrecy is first brought to a zero margin at `t = 0`.
    let mut best = problem.zero_point();
    let mut t_low = 0.0;
    let mut cur = problem.initial_point();
    let mut steps = 0;
    if see_of(&cur) < 0.0 {
        let r = problem.run(0.0, cur, cfg.eps_ccp, cfg.max_iter_ccp, true)?;
        steps += r.iterations;
        cur = r.point;
    }
    let mut t = see_of(&cur);
    while t >= 0.0 && steps < MAX_ASCENT * cfg.max_iter_ccp {
        let r = problem.run(t, cur, cfg.eps_ccp, 1, false)?;
        steps += r.iterations;
        let gained = see_of(&r.point);
        if r.iterations == 0 || gained < t {
            break;
        }
        if gained > 0.0 {
            best = r.point.clone();
            t_low = gained;
        }
        cur = r.point;
        if gained - t <= 0.1 * cfg.eps_bisect {
            break;
        }
        t = gained;
    }
    ccp_iterations.push(steps);

    if let Some(lo) = cfg.t_low {
        if lo > t_low {
            let r = problem.run(lo, best.clone(), cfg.eps_ccp, cfg.max_iter_ccp, true)?;
            ccp_iterations.push(r.iterations);
            trace.push((lo, r.margin >= -MARGIN_TOL));
            if r.margin < -MARGIN_TOL {
                return Err(Error::Bracketing);
            }
            best = r.point;
            t_low = lo;
        }
    }

    // Upper end: grow a step above `t_low` until a target fails. The rate
    // bound needs no check since nothing reaches it.
    let bound = problem.see_bound();
    let mut step = cfg.t_high.map_or(2.0 * cfg.eps_bisect, |hi| hi - t_low);
    let mut t_high = loop {
        let hi = match cfg.t_high {
            None if t_low + step >= bound => break bound.max(t_low),
            _ => t_low + step.max(cfg.eps_bisect),
        };
        let r = problem.run(hi, best.clone(), cfg.eps_ccp, cfg.max_iter_ccp, true)?;
        ccp_iterations.push(r.iterations);
        let ok = r.margin >= -MARGIN_TOL;
        trace.push((hi, ok));
        if !ok {
            break hi;
        }
        t_low = hi;
        best = r.point;
        step *= 2.0;
        if trace.len() > 64 {
            return Err(Error::Bracketing);
        }
    };
    if t_high < t_low {
        t_high = t_low;
    }
    let bracket = (t_low, t_high);

    let mut bisection_steps = 0;
    while t_high - t_low > cfg.eps_bisect {
        let t = 0.5 * (t_low + t_high);
        let r = problem.run(t, best.clone(), cfg.eps_ccp, cfg.max_iter_ccp, true)?;
        ccp_iterations.push(r.iterations);
        bisection_steps += 1;
        let ok = r.margin >= -MARGIN_TOL;
        trace.push((t, ok));
        if ok {
            t_low = t;
            best = r.point;
        } else {
            t_high = t;
        }
    }

    let sol = problem.to_solution(ch.scheme, &best);
    let min_see = metrics::min_see_raw(scenario, ch, &sol);
    if min_see < t_low - cfg.eps_bisect {
        return Err(Error::Domain(
            "returned precoder misses the certified target",
        ));
    }
    Ok(MaxMinOutcome {
        sol,
        t_star: t_low,
        min_see,
        bracket,
        bisection_steps,
        trace,
        ccp_iterations,
    })
}
