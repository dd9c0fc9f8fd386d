//! Small dense convex programs and a log-barrier interior-point solver.
//!
//! A [`ConvexProgram`] maximises `cᵀx − Σ wᵢ(lᵢᵀx)²` subject to four kinds
//! of constraint: linear, convex quadratic, second-order cone and the
//! hypograph of a scaled `log₂` of an affine argument. Linear forms are
//! sparse, and every quadratic is stored as a weighted sum of squares, so
//! convexity holds by construction.
//!
//! ```
//! use vlc_core::kernel::{solve, Constraint, ConvexProgram, LinForm, Objective, Tolerances};
//!
//! // maximize y  s.t.  y ≤ log₂(x + 1),  x ≤ 1
//! let p = ConvexProgram::new(
//!     2,
//!     Objective::linear(LinForm::var(1, 1.0)),
//!     vec![
//!         Constraint::concave_log(LinForm::var(1, 1.0).into(), 1.0, (LinForm::var(0, 1.0), 1.0).into()),
//!         Constraint::linear(LinForm::var(0, 1.0), 1.0),
//!     ],
//! );
//! let r = solve(&p, &Tolerances::default()).unwrap();
//! assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
//! ```

mod barrier;

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::math::{log2, sqrt};

pub use barrier::kkt_residual;

/// Sparse linear form `Σ cᵢ·x_{jᵢ}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinForm {
    pub terms: Vec<(usize, f64)>,
}

impl LinForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(index: usize, coeff: f64) -> Self {
        Self {
            terms: vec![(index, coeff)],
        }
    }

    /// Dense coefficients placed on variables `offset..offset + coeffs.len()`; zeros are dropped.
    pub fn dense(coeffs: &[f64], offset: usize) -> Self {
        Self {
            terms: coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (offset + i, *c))
                .collect(),
        }
    }

    pub fn with(mut self, index: usize, coeff: f64) -> Self {
        self.terms.push((index, coeff));
        self
    }

    pub fn push(&mut self, index: usize, coeff: f64) {
        self.terms.push((index, coeff));
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(i, c)| (i, c * s)).collect(),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum()
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// Affine expression `lᵀx + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub form: LinForm,
    pub constant: f64,
}

impl Affine {
    pub fn new(form: LinForm, constant: f64) -> Self {
        Self { form, constant }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            form: LinForm::new(),
            constant: c,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.form.eval(x) + self.constant
    }
}

impl From<LinForm> for Affine {
    fn from(form: LinForm) -> Self {
        Self {
            form,
            constant: 0.0,
        }
    }
}

impl From<(LinForm, f64)> for Affine {
    fn from((form, constant): (LinForm, f64)) -> Self {
        Self { form, constant }
    }
}

/// Positive semidefinite quadratic form `Σ wᵢ(lᵢᵀx)²` with `wᵢ ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Quadratic {
    pub squares: Vec<(f64, LinForm)>,
}

impl Quadratic {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, weight: f64, form: LinForm) -> Self {
        self.squares.push((weight, form));
        self
    }

    pub fn push(&mut self, weight: f64, form: LinForm) {
        self.squares.push((weight, form));
    }

    /// Factors a dense row-major `xᵀQx` as a sum of squares.
    pub fn from_dense(q: &[f64], n: usize) -> Result<Self, SolveError> {
        if q.len() != n * n {
            return Err(SolveError::InvalidProgram(
                "dense quadratic has the wrong size",
            ));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (q[i * n + j], q[j * n + i]);
                if crate::math::abs(a - b) > 1e-12 * (1.0 + crate::math::abs(a)) {
                    return Err(SolveError::InvalidProgram(
                        "dense quadratic is not symmetric",
                    ));
                }
            }
        }
        let (l, d) = linalg::ldl(q, n);
        let scale = (0..n).fold(0.0f64, |m, i| m.max(crate::math::abs(q[i * n + i])));
        let mut out = Self::new();
        for (j, &dj) in d.iter().enumerate() {
            if dj < -1e-10 * scale.max(1e-300) {
                return Err(SolveError::NonConvex);
            }
            if dj > 0.0 {
                let col: Vec<f64> = (0..n).map(|i| l[i * n + j]).collect();
                out.push(dj, LinForm::dense(&col, 0));
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.squares
            .iter()
            .map(|(w, l)| {
                let v = l.eval(x);
                w * v * v
            })
            .sum()
    }
}

/// One convex constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `aᵀx ≤ b`.
    Linear { a: LinForm, b: f64 },
    /// `q(x) + aᵀx ≤ b`.
    ConvexQuad { quad: Quadratic, a: LinForm, b: f64 },
    /// `‖(r₁(x), …, r_m(x))‖₂ ≤ bound(x)`.
    SecondOrderCone { rows: Vec<Affine>, bound: Affine },
    /// `lhs(x) ≤ scale·log₂(arg(x))` with `scale > 0`.
    ConcaveLog {
        lhs: Affine,
        scale: f64,
        arg: Affine,
    },
}

impl Constraint {
    pub fn linear(a: LinForm, b: f64) -> Self {
        Constraint::Linear { a, b }
    }

    pub fn quad(quad: Quadratic, a: LinForm, b: f64) -> Self {
        Constraint::ConvexQuad { quad, a, b }
    }

    pub fn soc(rows: Vec<Affine>, bound: Affine) -> Self {
        Constraint::SecondOrderCone { rows, bound }
    }

    pub fn concave_log(lhs: Affine, scale: f64, arg: Affine) -> Self {
        Constraint::ConcaveLog { lhs, scale, arg }
    }

    /// Amount by which `x` violates the constraint; non-positive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Linear { a, b } => a.eval(x) - b,
            Constraint::ConvexQuad { quad, a, b } => quad.eval(x) + a.eval(x) - b,
            Constraint::SecondOrderCone { rows, bound } => {
                sqrt(rows.iter().map(|r| r.eval(x) * r.eval(x)).sum::<f64>()) - bound.eval(x)
            }
            Constraint::ConcaveLog { lhs, scale, arg } => {
                let g = arg.eval(x);
                if g > 0.0 {
                    lhs.eval(x) - scale * log2(g)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Self-concordance parameter of the constraint's barrier.
    pub fn barrier_parameter(&self) -> f64 {
        match self {
            Constraint::Linear { .. } | Constraint::ConvexQuad { .. } => 1.0,
            Constraint::SecondOrderCone { .. } | Constraint::ConcaveLog { .. } => 2.0,
        }
    }

    fn max_index(&self) -> Option<usize> {
        match self {
            Constraint::Linear { a, .. } => a.max_index(),
            Constraint::ConvexQuad { quad, a, .. } => quad
                .squares
                .iter()
                .filter_map(|(_, l)| l.max_index())
                .chain(a.max_index())
                .max(),
            Constraint::SecondOrderCone { rows, bound } => rows
                .iter()
                .filter_map(|r| r.form.max_index())
                .chain(bound.form.max_index())
                .max(),
            Constraint::ConcaveLog { lhs, arg, .. } => {
                lhs.form.max_index().max(arg.form.max_index())
            }
        }
    }

    /// The constraint with `s` subtracted from its left side, where `s` is variable `slack`.
    fn relaxed(&self, slack: usize) -> Self {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear {
                a: a.clone().with(slack, -1.0),
                b: *b,
            },
            Constraint::ConvexQuad { quad, a, b } => Constraint::ConvexQuad {
                quad: quad.clone(),
                a: a.clone().with(slack, -1.0),
                b: *b,
            },
            Constraint::SecondOrderCone { rows, bound } => Constraint::SecondOrderCone {
                rows: rows.clone(),
                bound: Affine::new(bound.form.clone().with(slack, 1.0), bound.constant),
            },
            Constraint::ConcaveLog { lhs, scale, arg } => Constraint::ConcaveLog {
                lhs: Affine::new(lhs.form.clone().with(slack, -1.0), lhs.constant),
                scale: *scale,
                arg: arg.clone(),
            },
        }
    }
}

/// `maximize linearᵀx − quad(x)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub linear: LinForm,
    pub quad: Quadratic,
}

impl Objective {
    pub fn linear(linear: LinForm) -> Self {
        Self {
            linear,
            quad: Quadratic::new(),
        }
    }

    pub fn new(linear: LinForm, quad: Quadratic) -> Self {
        Self { linear, quad }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.linear.eval(x) - self.quad.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub n_vars: usize,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    /// Only a strictly feasible point is wanted; the objective is ignored.
    pub feasibility_only: bool,
    /// Starting guess for phase I; need not be feasible.
    pub start: Option<Vec<f64>>,
}

impl ConvexProgram {
    pub fn new(n_vars: usize, objective: Objective, constraints: Vec<Constraint>) -> Self {
        Self {
            n_vars,
            objective,
            constraints,
            feasibility_only: false,
            start: None,
        }
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    /// Largest constraint violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn barrier_parameter(&self) -> f64 {
        self.constraints
            .iter()
            .map(Constraint::barrier_parameter)
            .sum()
    }

    fn validate(&self) -> Result<(), SolveError> {
        if self.n_vars == 0 {
            return Err(SolveError::InvalidProgram("program has no variables"));
        }
        if let Some(s) = &self.start {
            if s.len() != self.n_vars {
                return Err(SolveError::InvalidProgram(
                    "start point has the wrong length",
                ));
            }
        }
        let in_range = |m: Option<usize>| m.map_or(true, |i| i < self.n_vars);
        if !in_range(self.objective.linear.max_index())
            || !self
                .objective
                .quad
                .squares
                .iter()
                .all(|(_, l)| in_range(l.max_index()))
            || !self.constraints.iter().all(|c| in_range(c.max_index()))
        {
            return Err(SolveError::InvalidProgram("variable index out of range"));
        }
        let weights_ok = |q: &Quadratic| q.squares.iter().all(|(w, _)| *w >= 0.0 && w.is_finite());
        if !weights_ok(&self.objective.quad) {
            return Err(SolveError::NonConvex);
        }
        for c in &self.constraints {
            match c {
                Constraint::ConvexQuad { quad, .. } if !weights_ok(quad) => {
                    return Err(SolveError::NonConvex)
                }
                Constraint::ConcaveLog { scale, .. } if !(*scale > 0.0) => {
                    return Err(SolveError::NonConvex)
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub barrier_mu_final: f64,
    pub newton_iterations: usize,
    /// Stationarity residual at `x`, see [`kkt_residual`].
    pub kkt_residual: f64,
    /// Objective value at the end of each barrier stage.
    pub stage_objectives: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid program: {0}")]
    InvalidProgram(&'static str),
    #[error("program is not convex")]
    NonConvex,
    #[error("numerical breakdown in the Newton system")]
    NumericalBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feas: f64,
    pub opt: f64,
    /// Initial barrier weight `μ₀`.
    pub mu0: f64,
    /// Factor by which `μ` shrinks between stages.
    pub mu_factor: f64,
    pub max_newton: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-8,
            opt: 1e-8,
            mu0: 1.0,
            mu_factor: 10.0,
            max_newton: 4000,
        }
    }
}

/// Solves `p` with a phase-I start followed by the barrier path.
pub fn solve(p: &ConvexProgram, tol: &Tolerances) -> Result<SolveReport, SolveError> {
    p.validate()?;
    let (feasible, x0, phase1_iters) = find_strict_point(p, tol, true)?;
    // A boundary-feasible program has no interior for the barrier to start from.
    if !feasible || p.max_violation(&x0) >= 0.0 {
        return Ok(SolveReport {
            status: SolveStatus::Infeasible,
            objective_value: p.objective.eval(&x0),
            x: x0,
            barrier_mu_final: f64::NAN,
            newton_iterations: phase1_iters,
            kkt_residual: f64::NAN,
            stage_objectives: Vec::new(),
        });
    }
    if p.feasibility_only {
        return Ok(SolveReport {
            status: SolveStatus::Optimal,
            objective_value: p.objective.eval(&x0),
            x: x0,
            barrier_mu_final: 0.0,
            newton_iterations: phase1_iters,
            kkt_residual: 0.0,
            stage_objectives: Vec::new(),
        });
    }
    let mut r = barrier::path(p, x0, tol, None)?;
    r.newton_iterations += phase1_iters;
    Ok(r)
}

/// Minimises the largest constraint violation `s`. Returns whether the
/// program is feasible (`s* < 0`, or `|s*| ≤ tol.feas` on the boundary)
/// together with the minimising point.
pub fn phase1_feasible(
    p: &ConvexProgram,
    tol: &Tolerances,
) -> Result<(bool, Vec<f64>), SolveError> {
    p.validate()?;
    let (ok, x, _) = find_strict_point(p, tol, false)?;
    Ok((ok, x))
}

fn find_strict_point(
    p: &ConvexProgram,
    tol: &Tolerances,
    early_exit: bool,
) -> Result<(bool, Vec<f64>, usize), SolveError> {
    let n = p.n_vars;
    let mut x0 = p.start.clone().unwrap_or_else(|| vec![0.0; n]);
    if early_exit && p.max_violation(&x0) < 0.0 {
        return Ok((true, x0, 0));
    }
    let mut iters = 0;
    // Every log argument must be positive before the relaxed barrier is defined.
    let log_args: Vec<&Affine> = p
        .constraints
        .iter()
        .filter_map(|c| match c {
            Constraint::ConcaveLog { arg, .. } => Some(arg),
            _ => None,
        })
        .collect();
    if log_args.iter().any(|a| !(a.eval(&x0) > 0.0)) {
        let pre = ConvexProgram {
            n_vars: n,
            objective: Objective::default(),
            constraints: log_args
                .iter()
                .map(|a| Constraint::linear(a.form.scaled(-1.0), a.constant))
                .collect(),
            feasibility_only: true,
            start: Some(x0.clone()),
        };
        let (ok, x, it) = find_strict_point(&pre, tol, true)?;
        iters += it;
        if !ok {
            return Ok((false, x, iters));
        }
        x0 = x;
        if early_exit && p.max_violation(&x0) < 0.0 {
            return Ok((true, x0, iters));
        }
    }

    let s = n;
    let radius = 1e6 * (1.0 + crate::math::norm_inf(&x0));
    let mut constraints: Vec<Constraint> = p.constraints.iter().map(|c| c.relaxed(s)).collect();
    constraints.push(Constraint::linear(LinForm::var(s, -1.0), 1.0));
    for (i, xi) in x0.iter().enumerate() {
        constraints.push(Constraint::linear(LinForm::var(i, 1.0), xi + radius));
        constraints.push(Constraint::linear(LinForm::var(i, -1.0), radius - xi));
    }
    let aux = ConvexProgram::new(n + 1, Objective::linear(LinForm::var(s, -1.0)), constraints);
    let mut z = x0.clone();
    z.push(p.max_violation(&x0).max(-0.5) + 1.0);
    let stop = if early_exit { Some(-1e-9) } else { None };
    let r = barrier::path(&aux, z, tol, stop.map(|v| (s, v)))?;
    iters += r.newton_iterations;
    let s_star = r.x[s];
    let mut x = r.x;
    x.truncate(n);
    let ok = s_star < 0.0 || crate::math::abs(s_star) <= tol.feas;
    Ok((ok, x, iters))
}
