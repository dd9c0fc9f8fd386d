//! Newton centering along the log-barrier path.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::{
    Constraint, ConvexProgram, LinForm, Quadratic, SolveError, SolveReport, SolveStatus, Tolerances,
};
use crate::linalg;
use crate::math::{abs, ln};

/// Dense accumulator for a sparse gradient.
struct Sparse {
    val: Vec<f64>,
    idx: Vec<usize>,
}

impl Sparse {
    fn new(n: usize) -> Self {
        Self {
            val: vec![0.0; n],
            idx: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn add(&mut self, i: usize, c: f64) {
        if self.val[i] == 0.0 && !self.idx.contains(&i) {
            self.idx.push(i);
        }
        self.val[i] += c;
    }

    fn add_form(&mut self, l: &LinForm, s: f64) {
        for &(i, c) in &l.terms {
            self.add(i, c * s);
        }
    }

    fn clear(&mut self) {
        for &i in &self.idx {
            self.val[i] = 0.0;
        }
        self.idx.clear();
    }
}

struct Workspace {
    n: usize,
    grad: Vec<f64>,
    hess: Vec<f64>,
    tmp: Sparse,
}

impl Workspace {
    fn rank1(&mut self, scale: f64) {
        let n = self.n;
        for &i in &self.tmp.idx {
            let vi = self.tmp.val[i] * scale;
            for &j in &self.tmp.idx {
                self.hess[i * n + j] += vi * self.tmp.val[j];
            }
        }
    }

    fn form_outer(&mut self, l: &LinForm, scale: f64) {
        let n = self.n;
        for &(i, a) in &l.terms {
            for &(j, b) in &l.terms {
                self.hess[i * n + j] += scale * a * b;
            }
        }
    }

    fn quad_hessian(&mut self, q: &Quadratic, scale: f64) {
        for (w, l) in &q.squares {
            self.form_outer(l, 2.0 * w * scale);
        }
    }

    fn tmp_into_grad(&mut self, scale: f64) {
        for &i in &self.tmp.idx {
            self.grad[i] += scale * self.tmp.val[i];
        }
    }
}

fn quad_grad_into(q: &Quadratic, x: &[f64], out: &mut Sparse, scale: f64) {
    for (w, l) in &q.squares {
        out.add_form(l, 2.0 * w * l.eval(x) * scale);
    }
}

/// Barrier value of one constraint, or `None` outside its domain.
fn barrier_value(c: &Constraint, x: &[f64]) -> Option<f64> {
    match c {
        Constraint::Linear { a, b } => {
            let s = b - a.eval(x);
            (s > 0.0).then(|| -ln(s))
        }
        Constraint::ConvexQuad { quad, a, b } => {
            let s = b - a.eval(x) - quad.eval(x);
            (s > 0.0).then(|| -ln(s))
        }
        Constraint::SecondOrderCone { rows, bound } => {
            let t = bound.eval(x);
            let psi = t * t - rows.iter().map(|r| sq(r.eval(x))).sum::<f64>();
            (t > 0.0 && psi > 0.0).then(|| -ln(psi))
        }
        Constraint::ConcaveLog { lhs, scale, arg } => {
            let g = arg.eval(x);
            if !(g > 0.0) {
                return None;
            }
            let r = scale * ln(g) / LN_2 - lhs.eval(x);
            (r > 0.0).then(|| -ln(r) - ln(g))
        }
    }
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

/// Adds `scale·∇` (and `scale·∇²` when `hess`) of one barrier term to the workspace.
fn barrier_derivs(c: &Constraint, x: &[f64], w: &mut Workspace, scale: f64, hess: bool) {
    w.tmp.clear();
    match c {
        Constraint::Linear { a, b } => {
            let s = b - a.eval(x);
            w.tmp.add_form(a, 1.0);
            w.tmp_into_grad(scale / s);
            if hess {
                w.rank1(scale / (s * s));
            }
        }
        Constraint::ConvexQuad { quad, a, b } => {
            // ψ = b − aᵀx − q(x); −∇ψ is accumulated in tmp.
            let s = b - a.eval(x) - quad.eval(x);
            w.tmp.add_form(a, 1.0);
            quad_grad_into(quad, x, &mut w.tmp, 1.0);
            w.tmp_into_grad(scale / s);
            if hess {
                w.rank1(scale / (s * s));
                w.quad_hessian(quad, scale / s);
            }
        }
        Constraint::SecondOrderCone { rows, bound } => {
            let t = bound.eval(x);
            let zs: Vec<f64> = rows.iter().map(|r| r.eval(x)).collect();
            let psi = t * t - zs.iter().map(|z| z * z).sum::<f64>();
            // ∇ψ = 2t·c − 2Σ zᵢ rᵢ
            w.tmp.add_form(&bound.form, 2.0 * t);
            for (r, z) in rows.iter().zip(&zs) {
                w.tmp.add_form(&r.form, -2.0 * z);
            }
            w.tmp_into_grad(-scale / psi);
            if hess {
                w.rank1(scale / (psi * psi));
                // −∇²ψ/ψ = (−2ccᵀ + 2Σ rrᵀ)/ψ
                w.form_outer(&bound.form, -2.0 * scale / psi);
                for r in rows {
                    w.form_outer(&r.form, 2.0 * scale / psi);
                }
            }
        }
        Constraint::ConcaveLog {
            lhs,
            scale: alpha,
            arg,
        } => {
            let g = arg.eval(x);
            let r = alpha * ln(g) / LN_2 - lhs.eval(x);
            let k = alpha / (g * LN_2);
            // ∇r = k·a_g − a_y
            w.tmp.add_form(&arg.form, k);
            w.tmp.add_form(&lhs.form, -1.0);
            w.tmp_into_grad(-scale / r);
            if hess {
                w.rank1(scale / (r * r));
            }
            w.tmp.clear();
            w.tmp.add_form(&arg.form, 1.0);
            w.tmp_into_grad(-scale / g);
            if hess {
                w.rank1(scale * (k / (g * r) + 1.0 / (g * g)));
            }
        }
    }
}

fn total_barrier(p: &ConvexProgram, x: &[f64]) -> Option<f64> {
    let mut s = 0.0;
    for c in &p.constraints {
        s += barrier_value(c, x)?;
    }
    Some(s)
}

/// `t·(−obj) + Φ`, or `None` outside the domain.
fn merit(p: &ConvexProgram, x: &[f64], t: f64) -> Option<f64> {
    Some(-t * p.objective.eval(x) + total_barrier(p, x)?)
}

fn fill(p: &ConvexProgram, x: &[f64], t: f64, w: &mut Workspace, hess: bool) {
    w.grad.iter_mut().for_each(|g| *g = 0.0);
    if hess {
        w.hess.iter_mut().for_each(|h| *h = 0.0);
    }
    for &(i, c) in &p.objective.linear.terms {
        w.grad[i] -= t * c;
    }
    w.tmp.clear();
    quad_grad_into(&p.objective.quad, x, &mut w.tmp, 1.0);
    w.tmp_into_grad(t);
    if hess {
        w.quad_hessian(&p.objective.quad, t);
    }
    for c in &p.constraints {
        barrier_derivs(c, x, w, 1.0, hess);
    }
}

/// Solves `H d = −g`, adding diagonal regularisation if `H` is not numerically positive definite.
fn newton_direction(w: &Workspace) -> Result<Vec<f64>, SolveError> {
    let n = w.n;
    let diag = (0..n).fold(0.0f64, |m, i| m.max(abs(w.hess[i * n + i])));
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut h = w.hess.clone();
        for i in 0..n {
            h[i * n + i] += reg;
        }
        if linalg::cholesky(&mut h, n).is_ok() {
            let mut d: Vec<f64> = w.grad.iter().map(|g| -g).collect();
            linalg::cholesky_solve(&h, n, &mut d);
            if d.iter().all(|v| v.is_finite()) {
                return Ok(d);
            }
        }
        reg = if reg == 0.0 {
            1e-14 * diag.max(1e-300)
        } else {
            reg * 100.0
        };
    }
    Err(SolveError::NumericalBreakdown)
}

/// Follows the barrier path from the strictly feasible `x0`. With `stop =
/// Some((i, v))` the path is abandoned as soon as `x[i] ≤ v`.
pub(super) fn path(
    p: &ConvexProgram,
    x0: Vec<f64>,
    tol: &Tolerances,
    stop: Option<(usize, f64)>,
) -> Result<SolveReport, SolveError> {
    let n = p.n_vars;
    let nu = p.barrier_parameter().max(1.0);
    let mut w = Workspace {
        n,
        grad: vec![0.0; n],
        hess: vec![0.0; n * n],
        tmp: Sparse::new(n),
    };
    let mut x = x0;
    let mut mu = tol.mu0;
    let mut iters = 0usize;
    let mut stages = Vec::new();
    let mut status = SolveStatus::Optimal;
    'outer: loop {
        let t = 1.0 / mu;
        let mut inner = 0;
        let mut prev_dec2 = f64::INFINITY;
        loop {
            if iters >= tol.max_newton {
                status = SolveStatus::MaxIter;
                break 'outer;
            }
            fill(p, &x, t, &mut w, true);
            let d = newton_direction(&w)?;
            let slope: f64 = w.grad.iter().zip(&d).map(|(g, d)| g * d).sum();
            let dec2 = -slope;
            if !(dec2 > 0.0) || dec2 / 2.0 <= 1e-13 {
                break;
            }
            // Past the quadratic phase a decrement that stops shrinking is rounding noise.
            if dec2 < 1e-6 && dec2 > 0.25 * prev_dec2 {
                break;
            }
            prev_dec2 = dec2;
            let f0 = merit(p, &x, t).ok_or(SolveError::NumericalBreakdown)?;
            let mut step = 1.0;
            let mut trial = vec![0.0; n];
            let accepted = loop {
                for i in 0..n {
                    trial[i] = x[i] + step * d[i];
                }
                if let Some(f1) = merit(p, &trial, t) {
                    // Near the centre the Armijo test drowns in rounding; domain membership suffices.
                    if dec2 < 1e-6 || f1 <= f0 + 0.01 * step * slope {
                        break true;
                    }
                }
                step *= 0.5;
                if step < 1e-16 {
                    break false;
                }
            };
            if !accepted {
                break;
            }
            core::mem::swap(&mut x, &mut trial);
            iters += 1;
            inner += 1;
            if let Some((i, v)) = stop {
                if x[i] <= v {
                    break 'outer;
                }
            }
            if inner >= 200 {
                break;
            }
        }
        stages.push(p.objective.eval(&x));
        if nu * mu < tol.opt {
            break;
        }
        mu /= tol.mu_factor;
    }
    let kkt = kkt_residual(p, &x, mu);
    Ok(SolveReport {
        status,
        objective_value: p.objective.eval(&x),
        x,
        barrier_mu_final: mu,
        newton_iterations: iters,
        kkt_residual: kkt,
        stage_objectives: stages,
    })
}

/// Slack `ψ ≥ 0` of one constraint and its dense gradient.
fn slack_and_grad(c: &Constraint, x: &[f64], n: usize) -> (f64, Vec<f64>) {
    let mut g = Sparse::new(n);
    let psi = match c {
        Constraint::Linear { a, b } => {
            g.add_form(a, -1.0);
            b - a.eval(x)
        }
        Constraint::ConvexQuad { quad, a, b } => {
            g.add_form(a, -1.0);
            quad_grad_into(quad, x, &mut g, -1.0);
            b - a.eval(x) - quad.eval(x)
        }
        Constraint::SecondOrderCone { rows, bound } => {
            let zs: Vec<f64> = rows.iter().map(|r| r.eval(x)).collect();
            let norm = crate::math::sqrt(zs.iter().map(|z| z * z).sum());
            g.add_form(&bound.form, 1.0);
            if norm > 0.0 {
                for (r, z) in rows.iter().zip(&zs) {
                    g.add_form(&r.form, -z / norm);
                }
            }
            bound.eval(x) - norm
        }
        Constraint::ConcaveLog { lhs, scale, arg } => {
            let v = arg.eval(x);
            g.add_form(&arg.form, scale / (v * LN_2));
            g.add_form(&lhs.form, -1.0);
            scale * ln(v) / LN_2 - lhs.eval(x)
        }
    };
    (psi, g.val)
}

/// Stationarity residual `‖∇obj + Σλᵢ∇ψᵢ‖∞` at `x` for constraints `ψᵢ ≥ 0`.
/// Multipliers start at the barrier estimates `μ/ψᵢ`; those of near-active
/// constraints are then refitted by nonnegative least squares and the smaller
/// residual is reported. A cone constraint at its apex is refitted with a
/// conic multiplier `(λ, u)`, `‖u‖ ≤ λ`, since its gradient is undefined there.
pub fn kkt_residual(p: &ConvexProgram, x: &[f64], mu: f64) -> f64 {
    let n = p.n_vars;
    if total_barrier(p, x).is_none() {
        return f64::INFINITY;
    }
    let mut base = vec![0.0; n];
    for &(i, c) in &p.objective.linear.terms {
        base[i] += c;
    }
    let mut q = Sparse::new(n);
    quad_grad_into(&p.objective.quad, x, &mut q, -1.0);
    for i in 0..n {
        base[i] += q.val[i];
    }
    let cons: Vec<(f64, Vec<f64>)> = p
        .constraints
        .iter()
        .map(|c| slack_and_grad(c, x, n))
        .collect();
    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, g| m.max(abs(*g)));
    let mut full = base.clone();
    for (psi, g) in &cons {
        for i in 0..n {
            full[i] += mu / psi * g[i];
        }
    }
    let barrier_res = inf_norm(&full);

    let near = crate::math::sqrt(mu).max(1e-12);
    let mut rhs = base;
    // (gradient, cone group): nonnegative columns have no group or lead
    // their group; the rows of an apex cone are free.
    let mut cols: Vec<(Vec<f64>, Option<usize>, bool)> = Vec::new();
    for (k, (psi, g)) in cons.iter().enumerate() {
        if *psi > near {
            for i in 0..n {
                rhs[i] += mu / psi * g[i];
            }
            continue;
        }
        match &p.constraints[k] {
            Constraint::SecondOrderCone { rows, bound }
                if rows.iter().all(|r| abs(r.eval(x)) <= near) =>
            {
                let dense = |f: &LinForm, s: f64| {
                    let mut v = vec![0.0; n];
                    for &(i, c) in &f.terms {
                        v[i] += c * s;
                    }
                    v
                };
                cols.push((dense(&bound.form, 1.0), Some(k), false));
                for r in rows {
                    cols.push((dense(&r.form, -1.0), Some(k), true));
                }
            }
            _ => cols.push((g.clone(), None, false)),
        }
    }
    let mut best = barrier_res;
    loop {
        let m = cols.len();
        if m == 0 {
            best = best.min(inf_norm(&rhs));
            break;
        }
        let mut gram = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for r in 0..m {
            for c in 0..m {
                gram[r * m + c] = cols[r].0.iter().zip(&cols[c].0).map(|(u, v)| u * v).sum();
            }
            b[r] = -cols[r].0.iter().zip(&rhs).map(|(u, v)| u * v).sum::<f64>();
        }
        let tr = (0..m).map(|i| gram[i * m + i]).sum::<f64>();
        for i in 0..m {
            gram[i * m + i] += 1e-14 * tr.max(1e-300);
        }
        if linalg::cholesky(&mut gram, m).is_err() {
            break;
        }
        linalg::cholesky_solve(&gram, m, &mut b);
        let neg = (0..m)
            .filter(|&r| !cols[r].2 && b[r] < 0.0)
            .min_by(|&i, &j| b[i].total_cmp(&b[j]));
        if let Some(r) = neg {
            match cols[r].1 {
                Some(k) => cols.retain(|c| c.1 != Some(k)),
                None => {
                    cols.remove(r);
                }
            }
            continue;
        }
        // Rows of an apex cone must lie inside the cone of their bound multiplier.
        let in_cone = (0..m)
            .filter(|&r| cols[r].1.is_some() && !cols[r].2)
            .all(|r| {
                let k = cols[r].1;
                let u2: f64 = (0..m)
                    .filter(|&c| cols[c].2 && cols[c].1 == k)
                    .map(|c| b[c] * b[c])
                    .sum();
                crate::math::sqrt(u2) <= b[r] * (1.0 + 1e-9)
            });
        if in_cone {
            let mut res = rhs.clone();
            for (r, (g, _, _)) in cols.iter().enumerate() {
                for i in 0..n {
                    res[i] += b[r] * g[i];
                }
            }
            best = best.min(inf_norm(&res));
        }
        break;
    }
    best
}
