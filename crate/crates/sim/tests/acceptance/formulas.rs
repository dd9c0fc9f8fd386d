//! Every worked example of the closed-form and single-instance operations,
//! plus the command-line contract.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::process::Command;

use rand::Rng;
use vlc_core::kernel::{
    phase1_feasible, solve, Affine, Constraint, LinForm, Objective, Quadratic, Tolerances,
};
use vlc_core::metrics::{self, Receiver};
use vlc_core::unknown_csi::{self, AnBasis, DesignConfig, DesignStatus, StageProblem};
use vlc_core::{
    build_channel, channel_gain, known_csi, lambertian_order, maxmin_see, noise_variance,
    normalized_noise, p12_feasible, ChannelState, ConvexProgram, MaxMinConfig, OpticalParams,
    Point3, PrecoderSolution, RoomScenario, SchemeKind, SolveStatus, PI_E,
};
use vlcsec::harness::{self, place_receivers, realization_rng, CsiMode, Design};
use vlcsec::Config;

use crate::kernel_oracle::{grid_oracle, random_program};
use crate::oracles::{ee_oracle, random_channel, rng, see_oracle, zf_miso_oracle, SCHEMES};
use crate::sweeps::{peak, Sweeps};
use crate::Verdict;

type Check = Result<(), String>;

fn close(what: &str, got: f64, want: f64, rel: f64) -> Check {
    let err = (got - want).abs();
    if err <= rel * want.abs() || (want == 0.0 && err <= rel) {
        Ok(())
    } else {
        Err(format!("{what}: got {got:e}, want {want:e}"))
    }
}

fn ensure(cond: bool, what: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Lower rate bound written out from its definition.
fn cb(s: f64, i: f64, n: f64) -> f64 {
    0.5 * ((2.0 * (s + i) + PI_E * n) / (PI_E * (i / 3.0 + n))).log2()
}

/// Eavesdropper upper rate bound written out from its definition.
fn ce(s: f64, i: f64, n: f64) -> f64 {
    0.5 * (PI_E * ((s + i) / 3.0 + n) / (2.0 * i + PI_E * n)).log2()
}

/// SISO channel with Alice on luminaire 1: Bob sees `h` from it and `jam`
/// from the others; each Eve is `(gains, noise)`.
fn siso(h: f64, jam: [f64; 3], noise: f64, eves: Vec<(Vec<f64>, f64)>) -> ChannelState {
    let g = vec![h, jam[0], jam[1], jam[2]];
    ChannelState::from_gains(SchemeKind::FixedSiso, g, noise, eves).unwrap()
}

fn sol(v: f64, an: Vec<Vec<f64>>) -> PrecoderSolution {
    PrecoderSolution::new(SchemeKind::FixedSiso, vec![v], an)
}

// ---- geometry ----

fn lambertian() -> Check {
    close("45°", lambertian_order(45.0).unwrap(), 2.0, 1e-12)?;
    let m = lambertian_order(30.0).unwrap();
    close(
        "30° formula",
        m,
        -LN_2 / (30f64.to_radians().cos()).ln(),
        1e-12,
    )?;
    // Quoted to three decimals.
    ensure((m - 4.818).abs() < 1e-3, format!("30°: {m} is not ≈ 4.818"))
}

fn gain_below_luminaire() -> Check {
    let o = OpticalParams::default();
    let h = channel_gain(&Point3::new(0.0, 0.0, 3.0), &Point3::new(0.0, 0.0, 0.5), &o).unwrap();
    close("g(0)", o.concentrator_gain(), 3.0, 1e-12)?;
    close("h", h, 1e-4 * 2.0 / (2.0 * PI * 6.25) * 3.0, 1e-12)?;
    close("h ≈ 1.528e-5", h, 1.528e-5, 1e-3)
}

fn gain_outside_fov() -> Check {
    let o = OpticalParams::default();
    // tan ψ = 2, ψ ≈ 63.4° > 60°.
    let h = channel_gain(&Point3::new(0.0, 0.0, 3.0), &Point3::new(5.0, 0.0, 0.5), &o).unwrap();
    ensure(h == 0.0, format!("gain {h}"))
}

fn gain_inverse_square() -> Check {
    let o = OpticalParams::default();
    let tx = Point3::new(0.0, 0.0, 3.0);
    let near = channel_gain(&tx, &Point3::new(0.6, 0.0, 2.2), &o).unwrap();
    let far = channel_gain(&tx, &Point3::new(1.2, 0.0, 1.4), &o).unwrap();
    close("ratio", near / far, 4.0, 1e-12)
}

fn noise_amplifier_only() -> Check {
    let mut o = OpticalParams::default();
    o.ambient_photocurrent = 0.0;
    let s = noise_variance(&[0.0; 4], 1.0, &o);
    close("σ²", s, o.preamp_density.powi(2) * o.bandwidth, 1e-15)
}

fn table_noise() -> (OpticalParams, f64, f64) {
    let o = OpticalParams::default();
    let i_dc = 1.0 / 0.44;
    let e = 1.602_176_634e-19;
    let shot = 2.0 * 0.54 * e * (0.44 * 1.528e-5 * i_dc) * 20e6;
    let amb = 4.0 * PI * e * 1e-4 * 0.54 * 10.93 * (1.0 - 0.5) * 20e6;
    let amp = 5e-12f64.powi(2) * 20e6;
    (o, i_dc, shot + amb + amp)
}

fn noise_reference_value() -> Check {
    let (o, i_dc, want) = table_noise();
    close("σ²", noise_variance(&[1.528e-5], i_dc, &o), want, 1e-12)
}

fn noise_shot_linear() -> Check {
    let o = OpticalParams::default();
    let g = [1.528e-5, 3e-6, 0.0, 7e-7];
    let (n0, n1, n2) = (
        noise_variance(&g, 0.0, &o),
        noise_variance(&g, 1.3, &o),
        noise_variance(&g, 2.6, &o),
    );
    close("σ²(2I) − σ²(I)", n2 - n1, n1 - n0, 1e-9)
}

fn normalisation() -> Check {
    let o = OpticalParams::default();
    let ge: f64 = o.responsivity * o.conversion;
    close("unit", normalized_noise(ge * ge / 3.0, &o), 1.0, 1e-12)?;
    let mut u = o;
    u.responsivity = 1.0;
    u.conversion = 1.0;
    close("γη = 1", normalized_noise(1.0, &u), 3.0, 1e-12)?;
    let (o, i_dc, s2) = table_noise();
    let got = normalized_noise(noise_variance(&[1.528e-5], i_dc, &o), &o);
    close("table", got, s2 * 3.0 / (0.54f64 * 0.44).powi(2), 1e-12)
}

fn alice_selection() -> Check {
    let sc = RoomScenario::reference_at_dbm(30.0);
    let ch = build_channel(&sc, (-SQRT_2, -SQRT_2), &[], SchemeKind::SelectiveSiso).unwrap();
    ensure(ch.alice_index == Some(0), "below luminaire 1")?;
    let ch = build_channel(&sc, (0.0, 0.0), &[], SchemeKind::SelectiveSiso).unwrap();
    let g = &ch.bob.gains;
    ensure(
        g.iter().all(|x| (x - g[0]).abs() <= 1e-15 * g[0]),
        "centre gains equal",
    )?;
    ensure(ch.alice_index == Some(0), "tie goes to luminaire 1")?;
    let mut r = rng(5);
    for _ in 0..1000 {
        let xy = (r.gen_range(-2.5..2.5), r.gen_range(-2.5..2.5));
        let (Ok(s), Ok(f)) = (
            build_channel(&sc, xy, &[], SchemeKind::SelectiveSiso),
            build_channel(&sc, xy, &[], SchemeKind::FixedSiso),
        ) else {
            continue;
        };
        ensure(
            s.bob.info[0] >= f.bob.info[0],
            format!("argmax dominance at {xy:?}"),
        )?;
    }
    Ok(())
}

// ---- metrics ----

fn headroom() -> Check {
    close(
        "(1,0.5,3)",
        metrics::delta_dc(1.0, 0.5, 3.0).unwrap(),
        0.5,
        0.0,
    )?;
    close(
        "(2,0,3)",
        metrics::delta_dc(2.0, 0.0, 3.0).unwrap(),
        1.0,
        0.0,
    )
}

fn sinr_examples() -> Check {
    let ch = siso(2.0, [1.0, 0.0, 0.0], 3.0, vec![]);
    let s = metrics::sinr(&ch, &sol(0.7, vec![vec![0.0; 3]]), Receiver::Bob);
    close("w = 0", s, (2.0f64 * 0.7).powi(2) / 3.0, 1e-15)?;
    let s = metrics::sinr(&ch, &sol(0.0, vec![vec![0.4, 0.0, 0.0]]), Receiver::Bob);
    ensure(s == 0.0, "v = 0")?;
    let s = metrics::sinr(&ch, &sol(1.0, vec![vec![1.0, 0.0, 0.0]]), Receiver::Bob);
    close("4/4", s, 1.0, 1e-15)
}

fn bob_rate_examples() -> Check {
    let ch = siso(1.0, [1.0, 0.0, 0.0], 1.0, vec![]);
    ensure(
        metrics::capacity_lower_bob(&ch, &sol(0.0, vec![vec![0.0; 3]])) == 0.0,
        "zero",
    )?;
    let ch2 = siso(0.8, [0.0, 0.0, 0.0], 1.7, vec![]);
    let got = metrics::capacity_lower_bob(&ch2, &sol(1.3, vec![vec![0.5, 0.2, 0.1]]));
    close(
        "no interference",
        got,
        0.5 * (1.0 + 2.0 * (0.8f64 * 1.3).powi(2) / (PI_E * 1.7)).log2(),
        1e-14,
    )?;
    let got = metrics::capacity_lower_bob(&ch, &sol(1.0, vec![vec![1.0, 0.0, 0.0]]));
    close(
        "h_Bv = h̄ᵀw = σ̄² = 1",
        got,
        0.5 * ((4.0 + PI_E) / (PI_E * 4.0 / 3.0)).log2(),
        1e-14,
    )
}

fn eve_rate_examples() -> Check {
    let eve = |h: f64, j: f64| (vec![h, j, 0.0, 0.0], 1.0);
    let ch = siso(1.0, [1.0, 0.0, 0.0], 1.0, vec![eve(1.0, 1.0)]);
    ensure(
        metrics::capacity_upper_eve(&ch, &sol(0.0, vec![vec![0.0; 3]]), 0) == 0.0,
        "zero",
    )?;
    let s: f64 = 0.6;
    let got = metrics::capacity_upper_eve(&ch, &sol(0.0, vec![vec![s.sqrt(), 0.0, 0.0]]), 0);
    let want = 0.5 * ((PI_E * s / 3.0 + PI_E) / (2.0 * s + PI_E)).log2();
    close("v = 0", got, want, 1e-14)?;
    ensure(got > 0.0, "positive since πe/3 > 2")?;
    let got = metrics::capacity_upper_eve(&ch, &sol(1.0, vec![vec![1.0, 0.0, 0.0]]), 0);
    close(
        "unit",
        got,
        0.5 * (PI_E * (2.0 / 3.0 + 1.0) / (2.0 + PI_E)).log2(),
        1e-14,
    )
}

fn power_examples() -> Check {
    let sc = RoomScenario::reference(1.0);
    close(
        "static",
        metrics::total_power(&sc, &sol(0.0, vec![vec![0.0; 3]])),
        21.2,
        1e-12,
    )?;
    let p = metrics::total_power(&sc, &sol(0.5f64.sqrt(), vec![]));
    close("ζ·0.5", p - 21.2, 1.0, 1e-12)?;
    let w = vec![0.3, -0.2, 0.1];
    let two = metrics::total_power(&sc, &sol(0.0, vec![w.clone(), w.clone()])) - 21.2;
    let one = metrics::total_power(&sc, &sol(0.0, vec![w])) - 21.2;
    close("tr(WWᵀ)", two, 2.0 * one, 1e-12)
}

fn ee_examples() -> Check {
    let sc = RoomScenario::reference(1.0);
    let ch = siso(1.0, [1.0, 0.0, 0.0], 1.0, vec![]);
    ensure(
        metrics::ee_bob(&sc, &ch, &sol(0.0, vec![vec![0.0; 3]])) == 0.0,
        "zero",
    )?;
    let s = sol(1.0, vec![vec![1.0, 0.0, 0.0]]);
    let mut doubled = sc.clone();
    doubled.power.p_circuit *= 2.0;
    doubled.power.u_leds *= 2.0;
    doubled.power.zeta *= 2.0;
    close(
        "halved",
        metrics::ee_bob(&doubled, &ch, &s),
        metrics::ee_bob(&sc, &ch, &s) / 2.0,
        1e-14,
    )?;
    let want = 0.5 * ((4.0 + PI_E) / (PI_E * 4.0 / 3.0)).log2() / (21.2 + 2.0 * 2.0);
    close("composition", metrics::ee_bob(&sc, &ch, &s), want, 1e-12)
}

fn secrecy_examples() -> Check {
    let ch = siso(
        0.9,
        [0.4, 0.3, 0.2],
        1.3,
        vec![(vec![0.9, 0.4, 0.3, 0.2], 1.3)],
    );
    let s = sol(0.0, vec![vec![0.5, -0.4, 0.2]]);
    ensure(
        metrics::secrecy_rate_k(&ch, &s, 0) == 0.0,
        "co-located, v = 0",
    )?;
    let ch = siso(0.9, [0.4, 0.3, 0.2], 1.3, vec![(vec![0.0; 4], 0.8)]);
    let s = sol(1.1, vec![vec![0.5, -0.4, 0.2]]);
    close(
        "dark Eve",
        metrics::secrecy_rate_k(&ch, &s, 0),
        metrics::capacity_lower_bob(&ch, &s),
        1e-14,
    )?;
    let ch = siso(
        0.9,
        [0.4, 0.3, 0.2],
        1.3,
        vec![(vec![0.5, 0.1, 0.6, 0.2], 0.7)],
    );
    let (iw, ie) = (
        0.4 * 0.5 - 0.3 * 0.4 + 0.2 * 0.2,
        0.1 * 0.5 - 0.6 * 0.4 + 0.2 * 0.2,
    );
    let want = (cb((0.9 * 1.1f64).powi(2), iw * iw, 1.3)
        - ce((0.5 * 1.1f64).powi(2), ie * ie, 0.7))
    .max(0.0);
    close("generic", metrics::secrecy_rate_k(&ch, &s, 0), want, 1e-13)?;
    ensure(want > 0.0, "generic instance has positive secrecy")
}

fn min_see_examples() -> Check {
    let sc = RoomScenario::reference(1.0);
    let e1 = (vec![0.5, 0.1, 0.6, 0.2], 0.7);
    let e2 = (vec![0.7, 0.3, 0.1, 0.0], 0.9);
    let one = siso(0.9, [0.4, 0.3, 0.2], 1.3, vec![e1.clone()]);
    let two = siso(0.9, [0.4, 0.3, 0.2], 1.3, vec![e1, e2]);
    let s = sol(1.1, vec![vec![0.5, -0.4, 0.2]]);
    let p = metrics::total_power(&sc, &s);
    let single = metrics::secrecy_rate_k(&one, &s, 0) / p;
    close(
        "K = 1",
        metrics::min_see(&sc, &one, &s).unwrap(),
        single,
        1e-15,
    )?;
    let m2 = metrics::min_see(&sc, &two, &s).unwrap();
    ensure(m2 <= single, "adding an Eve")?;
    let ib = 0.4 * 0.5 - 0.3 * 0.4 + 0.2 * 0.2;
    let bob = cb((0.9 * 1.1f64).powi(2), ib * ib, 1.3);
    let i1 = 0.1 * 0.5 - 0.6 * 0.4 + 0.2 * 0.2;
    let i2 = 0.3 * 0.5 - 0.1 * 0.4;
    let r1 = (bob - ce((0.5 * 1.1f64).powi(2), i1 * i1, 0.7)).max(0.0);
    let r2 = (bob - ce((0.7 * 1.1f64).powi(2), i2 * i2, 0.9)).max(0.0);
    let pw = 21.2 + 2.0 * (1.21 + 0.25 + 0.16 + 0.04);
    close("manual", m2, r1.min(r2) / pw, 1e-13)
}

fn bob_rate_slope() -> Check {
    let mut r = rng(11);
    for _ in 0..1000 {
        let s = r.gen_range(0.0..20.0);
        let i = r.gen_range(0.0..20.0);
        let n = r.gen_range(0.05..5.0);
        let h = 1e-6 * (1.0 + i);
        let d =
            metrics::rate_lower_raw(s, i + h, n) - metrics::rate_lower_raw(s, (i - h).max(0.0), n);
        ensure(d < 0.0, format!("C′_B ≥ 0 at s={s}, i={i}, σ̄²={n}"))?;
    }
    Ok(())
}

// ---- kernel ----

fn kernel_examples() -> Check {
    let tol = Tolerances::default();
    let p = ConvexProgram::new(
        1,
        Objective::new(
            LinForm::new(),
            Quadratic::new().with(1.0, LinForm::var(0, 1.0)),
        ),
        vec![Constraint::linear(LinForm::var(0, -1.0), -1.0)],
    );
    let r = solve(&p, &tol).map_err(|e| e.to_string())?;
    close("boundary optimum", r.x[0], 1.0, 1e-6)?;
    let p = ConvexProgram::new(
        2,
        Objective::linear(LinForm::var(1, 1.0)),
        vec![
            Constraint::concave_log(
                LinForm::var(1, 1.0).into(),
                1.0,
                Affine::new(LinForm::var(0, 1.0), 1.0),
            ),
            Constraint::linear(LinForm::var(0, 1.0), 1.0),
        ],
    );
    let r = solve(&p, &tol).map_err(|e| e.to_string())?;
    close("x", r.x[0], 1.0, 1e-6)?;
    close("y", r.x[1], 1.0, 1e-6)
}

fn kernel_five_vars() -> Check {
    for seed in 1000..1020u64 {
        let p = random_program(seed, 5);
        let r = solve(&p, &Tolerances::default()).map_err(|e| e.to_string())?;
        ensure(
            r.status == SolveStatus::Optimal,
            format!("{seed}: {:?}", r.status),
        )?;
        let g = grid_oracle(&p).ok_or("grid found nothing")?;
        ensure(
            (r.objective_value - g).abs() <= 1e-4,
            format!("{seed}: {} vs {g}", r.objective_value),
        )?;
    }
    Ok(())
}

fn phase1_examples() -> Check {
    let tol = Tolerances::default();
    let b = ConvexProgram::new(
        1,
        Objective::default(),
        vec![
            Constraint::linear(LinForm::var(0, 1.0), 1.0),
            Constraint::linear(LinForm::var(0, -1.0), 0.0),
        ],
    );
    let (ok, x) = phase1_feasible(&b, &tol).map_err(|e| e.to_string())?;
    ensure(ok, "box infeasible")?;
    close("centre", x[0], 0.5, 1e-6)?;
    let e = ConvexProgram::new(
        1,
        Objective::default(),
        vec![
            Constraint::linear(LinForm::var(0, 1.0), 0.0),
            Constraint::linear(LinForm::var(0, -1.0), -1.0),
        ],
    );
    let (ok, _) = phase1_feasible(&e, &tol).map_err(|e| e.to_string())?;
    ensure(!ok, "x ≤ 0 and x ≥ 1 feasible")?;
    let sc = RoomScenario::reference_at_dbm(30.0);
    let ch = random_channel(&mut rng(12), &sc, SchemeKind::Miso, 2);
    let cfg = MaxMinConfig::default();
    let f = p12_feasible(&ch, &sc, 0.0, &cfg, Some(&PrecoderSolution::zeros(&ch, 2)))
        .map_err(|e| e.to_string())?;
    ensure(f.feasible, "t = 0 from zero precoders")
}

// ---- unknown CSI ----

fn p1_noan_examples() -> Check {
    let mut r = rng(13);
    for scheme in [SchemeKind::FixedSiso, SchemeKind::SelectiveSiso] {
        for _ in 0..3 {
            let sc = RoomScenario::reference_at_dbm(r.gen_range(26.0..44.0));
            let ch = random_channel(&mut r, &sc, scheme, 1);
            let out = unknown_csi::solve_p1_noan(&ch, &sc, &DesignConfig::default())
                .map_err(|e| e.to_string())?;
            ensure(out.sol.an.iter().flatten().all(|w| *w == 0.0), "w = 0")?;
            close(
                "EE consistency",
                out.ee_bob,
                metrics::ee_bob(&sc, &ch, &out.sol),
                1e-15,
            )?;
            let delta = sc.delta_dc();
            let mut s = PrecoderSolution::new(scheme, vec![0.0], vec![]);
            let n = 100_000;
            let grid = (0..=n)
                .map(|i| {
                    s.info[0] = delta * i as f64 / n as f64;
                    metrics::ee_bob(&sc, &ch, &s)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            ensure(
                (out.ee_bob - grid).abs() <= 1e-6 * grid,
                format!("{} vs grid {grid}", out.ee_bob),
            )?;
        }
    }
    Ok(())
}

fn dinkelbach_examples() -> Check {
    let mut r = rng(14);
    for i in 0..4 {
        let sc = RoomScenario::reference_at_dbm(r.gen_range(26.0..44.0));
        let ch = random_channel(&mut r, &sc, SchemeKind::SelectiveSiso, 1);
        let cfg = DesignConfig::from_rho(0.2, 1.0, &sc);
        let out = unknown_csi::general_design(&ch, &sc, &cfg).map_err(|e| e.to_string())?;
        if out.status != DesignStatus::Solved {
            continue;
        }
        let lam = &out.lambda_trace;
        ensure(
            lam.windows(2).all(|w| w[1] >= w[0]),
            format!("λ trace {lam:?}"),
        )?;
        let last = *out.dinkelbach_errors.last().unwrap();
        ensure(
            (0.0..=cfg.eps_dinkelbach).contains(&last),
            format!("terminal {last}"),
        )?;
        let oracle = ee_oracle(&ch, &sc, &cfg, i);
        ensure(
            out.ee_bob >= 0.99 * oracle,
            format!("EE {} vs oracle {oracle}", out.ee_bob),
        )?;
    }
    Ok(())
}

fn ccp_fixed_point() -> Check {
    let sc = RoomScenario::reference_at_dbm(32.0);
    let ch = random_channel(&mut rng(15), &sc, SchemeKind::SelectiveSiso, 1);
    let mut cfg = DesignConfig::from_rho(0.2, 1.0, &sc);
    cfg.eps_ccp = 1e-9;
    cfg.max_iter_ccp = 200;
    let out = unknown_csi::general_design(&ch, &sc, &cfg).map_err(|e| e.to_string())?;
    let lambda = *out.lambda_trace.last().unwrap();
    let prob = StageProblem::new(&ch, &sc, &cfg, &AnBasis::Free);
    let delta = sc.delta_dc();
    let start = unknown_csi::StagePoint {
        x: out.sol.info.iter().map(|v| v / delta).collect(),
        y: out.sol.an[0].iter().map(|v| v / delta).collect(),
    };
    let first = unknown_csi::ccp_stage(&prob, &cfg, lambda, &start)
        .map_err(|e| e.to_string())?
        .ok_or("stage infeasible")?;
    let kkt = first.point;
    let mut strict = cfg.clone();
    strict.eps_ccp = 1e-6;
    let again = unknown_csi::ccp_stage(&prob, &strict, lambda, &kkt)
        .map_err(|e| e.to_string())?
        .ok_or("stage infeasible")?;
    ensure(
        again.iterations == 1,
        format!("{} iterations from a KKT point", again.iterations),
    )
}

fn zf_basis_examples() -> Check {
    let w = unknown_csi::zf_basis(&[1.0, 0.0, 0.0]);
    let h = 0.5f64.sqrt();
    for (a, b) in w.iter().zip([0.0, h, h]) {
        close("(0,1,1)/√2", *a, b, 1e-15)?;
    }
    let mut r = rng(16);
    for _ in 0..1000 {
        let n = r.gen_range(2..6);
        let hb: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let w = unknown_csi::zf_basis(&hb);
        let d: f64 = hb.iter().zip(&w).map(|(a, b)| a * b).sum();
        ensure(d.abs() <= 1e-12, format!("h̄ᵀw̃ = {d}"))?;
    }
    let w = unknown_csi::zf_basis(&[1.0, 1.0]);
    ensure(
        (w[0] + w[1]).abs() <= 1e-15 && (w[0].abs() - h).abs() <= 1e-15,
        format!("{w:?}"),
    )
}

fn zf_power_interior() -> Check {
    let mut r = rng(17);
    let mut interior = 0;
    for _ in 0..200 {
        if interior == 3 {
            break;
        }
        let sc = RoomScenario::reference_at_dbm(r.gen_range(26.0..44.0));
        let ch = random_channel(&mut r, &sc, SchemeKind::SelectiveSiso, 1);
        let cfg = DesignConfig::from_rho(0.2, 1.0, &sc);
        let Ok(Some((v, ee))) = unknown_csi::zf_optimal_v(&ch, &sc, &cfg, cfg.p_th) else {
            continue;
        };
        let h = ch.bob.info[0];
        let lo = cfg.delta_b * ch.bob.noise_norm / (h * h);
        let hi = sc.delta_dc().powi(2);
        if !(v > lo * (1.0 + 1e-9) && v < hi * (1.0 - 1e-9)) {
            continue;
        }
        interior += 1;
        let a = 2.0 * h * h / (PI_E * ch.bob.noise_norm);
        let p0 = metrics::static_power(&sc) + sc.power.zeta * cfg.p_th;
        let phi = |v: f64| 0.5 * (1.0 + a * v).log2() / (p0 + sc.power.zeta * v);
        let n = 1_000_000;
        let grid = (0..=n)
            .map(|i| phi(lo + (hi - lo) * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(
            (ee - grid).abs() <= 1e-8 * grid,
            format!("{ee} vs grid {grid}"),
        )?;
    }
    ensure(
        interior == 3,
        format!("only {interior} interior instances found"),
    )
}

fn zf_miso_examples() -> Check {
    let mut r = rng(18);
    for i in 0..3 {
        let sc = RoomScenario::reference_at_dbm(r.gen_range(26.0..44.0));
        let (x, y) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let Ok(ch) = build_channel(&sc, (x, y), &[], SchemeKind::Miso) else {
            continue;
        };
        let cfg = DesignConfig::from_rho(0.2, 1.0, &sc);
        let out = unknown_csi::zf_miso(&ch, &sc, &cfg).map_err(|e| e.to_string())?;
        if out.status != DesignStatus::Solved {
            continue;
        }
        let w = &out.sol.an[0];
        let hw: f64 = ch.bob.jam.iter().zip(w).map(|(a, b)| a * b).sum();
        let scale = ch.bob.jam.iter().map(|a| a * a).sum::<f64>().sqrt()
            * w.iter().map(|a| a * a).sum::<f64>().sqrt();
        ensure(
            hw.abs() <= 1e-10 * scale.max(1e-300),
            format!("h_Bᵀw = {hw:e}"),
        )?;
        let siso = build_channel(&sc, (x, y), &[], SchemeKind::SelectiveSiso)
            .map_err(|e| e.to_string())?;
        let s = unknown_csi::zf_siso(&siso, &sc, &cfg).map_err(|e| e.to_string())?;
        if s.status == DesignStatus::Solved {
            ensure(
                out.ee_bob >= s.ee_bob * (1.0 - 1e-4),
                format!("MISO ZF {} < SISO ZF {}", out.ee_bob, s.ee_bob),
            )?;
        }
        let oracle = zf_miso_oracle(&ch, &sc, &cfg, i);
        ensure(
            (out.ee_bob - oracle).abs() <= 0.01 * oracle,
            format!("{} vs oracle {oracle}", out.ee_bob),
        )?;
    }
    Ok(())
}

// ---- known CSI ----

fn p12_examples() -> Check {
    let sc = RoomScenario::reference_at_dbm(34.0);
    let mut r = rng(19);
    let cfg = MaxMinConfig::default();
    let ch = random_channel(&mut r, &sc, SchemeKind::SelectiveSiso, 1);
    let f = p12_feasible(&ch, &sc, 0.0, &cfg, Some(&PrecoderSolution::zeros(&ch, 1)))
        .map_err(|e| e.to_string())?;
    ensure(f.feasible, "t = 0")?;
    let delta = sc.delta_dc();
    let ceiling =
        metrics::capacity_lower_bob(&ch, &PrecoderSolution::new(ch.scheme, vec![delta], vec![]))
            / metrics::static_power(&sc);
    let f = p12_feasible(&ch, &sc, 1.01 * ceiling, &cfg, None).map_err(|e| e.to_string())?;
    ensure(!f.feasible, "above the rate ceiling")?;

    // Boundary against the best of a dense random sample of (v, W).
    let out = maxmin_see(&ch, &sc, &cfg).map_err(|e| e.to_string())?;
    let mut s = PrecoderSolution::new(ch.scheme, vec![0.0], vec![vec![0.0; 3]]);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..400_000 {
        s.info[0] = r.gen_range(-delta..delta);
        for w in s.an[0].iter_mut() {
            *w = r.gen_range(-delta..delta);
        }
        best = best.max(metrics::min_see_raw(&sc, &ch, &s));
    }
    ensure(
        (out.t_star - best.max(0.0)).abs() <= cfg.eps_bisect,
        format!("t* {} vs sampled {best}", out.t_star),
    )
}

fn maxmin_examples() -> Check {
    let mut r = rng(20);
    let cfg = MaxMinConfig::default();
    for scheme in SCHEMES {
        let sc = RoomScenario::reference_at_dbm(r.gen_range(26.0..44.0));
        let ch = random_channel(&mut r, &sc, scheme, 2);
        let out = maxmin_see(&ch, &sc, &cfg).map_err(|e| e.to_string())?;
        let m = metrics::min_see(&sc, &ch, &out.sol).map_err(|e| e.to_string())?;
        ensure(
            m >= out.t_star - cfg.eps_bisect,
            format!("min_see {m} vs t* {}", out.t_star),
        )?;

        let xy = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let co = build_channel(&sc, xy, &[xy], scheme).map_err(|e| e.to_string())?;
        let out = maxmin_see(&co, &sc, &cfg).map_err(|e| e.to_string())?;
        ensure(
            out.t_star <= cfg.eps_bisect,
            format!("co-located t* {}", out.t_star),
        )?;

        let ch = random_channel(&mut r, &sc, scheme, 1);
        let tight = MaxMinConfig {
            eps_bisect: 1e-6,
            ..cfg.clone()
        };
        let out = maxmin_see(&ch, &sc, &tight).map_err(|e| e.to_string())?;
        let o = see_oracle(&ch, &sc, true, 21);
        let ok = if o > 0.0 {
            (out.t_star - o).abs() <= 0.02 * o
        } else {
            out.t_star <= tight.eps_bisect
        };
        ensure(ok, format!("{scheme:?}: t* {} vs oracle {o}", out.t_star))?;
    }
    let _ = known_csi::MARGIN_TOL;
    Ok(())
}

// ---- harness ----

fn harness_examples() -> Check {
    let sc = RoomScenario::reference_at_dbm(30.0);
    for i in 0..20 {
        let a = place_receivers(&mut realization_rng(9, i), &sc, 3);
        let b = place_receivers(&mut realization_rng(9, i), &sc, 3);
        ensure(a == b, "replay")?;
    }
    let settings = Config::default();
    let sc = settings.scenario_at(30.0);
    let ch = build_channel(&sc, (0.4, -0.9), &[(1.5, 1.2)], SchemeKind::SelectiveSiso).unwrap();
    let d: Design = "selective_siso".parse().unwrap();
    let s = harness::evaluate(
        d,
        CsiMode::Unknown,
        &sc,
        &ch,
        &settings,
        settings.design.rho,
    );
    let direct =
        unknown_csi::general_design(&ch, &sc, &settings.design_config(&sc, settings.design.rho))
            .unwrap();
    ensure(s.feasible && s.ee == direct.ee_bob, "pass-through EE")?;
    ensure(s.see == direct.resultant_see.unwrap(), "pass-through SEE")?;

    let same = siso(
        0.9,
        [0.4, 0.3, 0.2],
        1.3,
        vec![(vec![0.9, 0.4, 0.3, 0.2], 1.3)],
    );
    ensure(
        harness::sinr_gap(&same, &sol(0.8, vec![vec![0.0; 3]])) == 0.0,
        "identical receivers",
    )?;
    let dark = siso(0.9, [0.4, 0.3, 0.2], 1.3, vec![(vec![0.0; 4], 1.3)]);
    ensure(
        harness::sinr_gap(&dark, &sol(0.8, vec![vec![0.0; 3]])) == 100.0,
        "cap",
    )?;
    let gen = siso(
        0.9,
        [0.4, 0.3, 0.2],
        1.3,
        vec![(vec![0.5, 0.1, 0.6, 0.2], 0.7)],
    );
    let s = sol(1.1, vec![vec![0.5, -0.4, 0.2]]);
    let ib = 0.4 * 0.5 - 0.3 * 0.4 + 0.2 * 0.2;
    let ie = 0.1 * 0.5 - 0.6 * 0.4 + 0.2 * 0.2;
    let sb = (0.9 * 1.1f64).powi(2) / (ib * ib + 1.3);
    let se = (0.5 * 1.1f64).powi(2) / (ie * ie + 0.7);
    close(
        "generic gap",
        harness::sinr_gap(&gen, &s),
        10.0 * sb.log10() - 10.0 * se.log10(),
        1e-12,
    )
}

// ---- command line ----

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vlcsec"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn header(csv: &str) -> Option<&str> {
    csv.lines().nth(1)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn cli_contract() -> Check {
    for (cmd, want) in [
        (
            "sweep-power",
            "p_t_dbm,scheme,csi_mode,mean_ee,mean_see,feas_prob,mean_sinr_gap_db,n_feasible",
        ),
        ("feasibility", "rho,p_t_dbm,scheme,feas_prob"),
        ("eves-sweep", "k_eves,scheme,mean_min_see"),
        ("convergence", "realization,scheme,algo,iter,error"),
    ] {
        let (code, out) = cli(&[cmd, "--realizations", "1", "--seed", "4"]);
        ensure(code == 0, format!("{cmd} exit {code}"))?;
        ensure(
            out.lines().next() == Some("# seed=4"),
            format!("{cmd} seed line"),
        )?;
        ensure(header(&out) == Some(want), format!("{cmd} header"))?;
        ensure(out.lines().count() > 2, format!("{cmd} has no rows"))?;
        if cmd == "feasibility" {
            let r = rows(&out);
            ensure(
                r.len() == 21 * 3 * 6,
                format!("{} feasibility rows", r.len()),
            )?;
            ensure(
                r.iter()
                    .all(|r| r[3].parse::<f64>().is_ok_and(|p| (0.0..=1.0).contains(&p))),
                "feas_prob outside [0, 1]",
            )?;
        }
        if cmd == "eves-sweep" {
            let mut ks: Vec<usize> = rows(&out)
                .iter()
                .filter_map(|r| r[0].parse().ok())
                .collect();
            ks.dedup();
            ensure(ks == vec![1, 2, 3, 4, 5], format!("K column {ks:?}"))?;
        }
    }
    let (_, out) = cli(&["convergence", "--realizations", "2"]);
    let (_, again) = cli(&["convergence", "--realizations", "2"]);
    ensure(out == again, "convergence replay")?;
    let (_, one) = cli(&["sweep-power", "--realizations", "3", "--threads", "1"]);
    let (_, two) = cli(&["sweep-power", "--realizations", "3", "--threads", "2"]);
    ensure(one == two, "thread count changes sweep-power output")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[design]\nrhoo = 0.3\n").map_err(|e| e.to_string())?;
    let (code, _) = cli(&["sweep-power", "--config", bad.to_str().unwrap()]);
    ensure(code == 2, format!("bad config exit {code}"))?;
    let csv = dir.path().join("eves.csv");
    let (code, printed) = cli(&[
        "eves-sweep",
        "--realizations",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    ensure(code == 0 && printed.is_empty(), "--out still prints")?;
    let (_, direct) = cli(&["eves-sweep", "--realizations", "1"]);
    let written = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    ensure(written == direct, "--out differs from stdout")?;

    let (code, json) = cli(&["design", "--bob", "0.5,0.5", "--eve", "-1,1"]);
    ensure(code == 0, format!("design exit {code}"))?;
    let v: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    ensure(
        v["csi_mode"] == "unknown" && v["an"].is_array(),
        "design JSON",
    )?;

    let s = Config::default().sweep;
    let want: Vec<f64> = (0..10).map(|i| 26.0 + 2.0 * i as f64).collect();
    ensure(s.p_t_dbm == want, "power grid 26–44 dBm")?;
    ensure(
        s.rho.len() == 21
            && s.rho
                .iter()
                .enumerate()
                .all(|(i, r)| (r - 0.05 * i as f64).abs() < 1e-12),
        "ρ grid",
    )?;
    ensure(s.k_eves == vec![1, 2, 3, 4, 5], "K grid")
}

fn cli_sweeps(sw: &Sweeps) -> Check {
    let res = sw.unknown_power();
    let grid = Config::default().sweep.p_t_dbm;
    for scheme in ["fixed_siso", "selective_siso", "miso"] {
        let (_, at) = peak(res, scheme);
        ensure(
            at > grid[0] && at < *grid.last().unwrap(),
            format!("{scheme} SEE peaks at the grid edge ({at} dBm)"),
        )?;
    }
    for r in sw.feasibility() {
        ensure(
            r.points.iter().all(|p| (0.0..=1.0).contains(&p.feas_prob)),
            "feas_prob ∉ [0, 1]",
        )?;
    }
    Ok(())
}

pub fn all_examples(sw: &Sweeps) -> Verdict {
    let checks: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("lambertian_order", Box::new(lambertian)),
        ("gain below luminaire", Box::new(gain_below_luminaire)),
        ("gain outside FOV", Box::new(gain_outside_fov)),
        ("gain 1/l²", Box::new(gain_inverse_square)),
        ("noise amplifier term", Box::new(noise_amplifier_only)),
        ("noise reference value", Box::new(noise_reference_value)),
        ("noise shot linearity", Box::new(noise_shot_linear)),
        ("normalized_noise", Box::new(normalisation)),
        ("build_channel alice", Box::new(alice_selection)),
        ("delta_dc", Box::new(headroom)),
        ("sinr", Box::new(sinr_examples)),
        ("capacity_lower_bob", Box::new(bob_rate_examples)),
        ("capacity_upper_eve", Box::new(eve_rate_examples)),
        ("total_power", Box::new(power_examples)),
        ("ee_bob", Box::new(ee_examples)),
        ("secrecy_rate_k", Box::new(secrecy_examples)),
        ("min_see", Box::new(min_see_examples)),
        ("C′_B sign (1000 points)", Box::new(bob_rate_slope)),
        ("solve examples", Box::new(kernel_examples)),
        ("solve 5-var vs grid", Box::new(kernel_five_vars)),
        ("phase1_feasible", Box::new(phase1_examples)),
        ("solve_p1_noan", Box::new(p1_noan_examples)),
        ("dinkelbach_ee", Box::new(dinkelbach_examples)),
        ("ccp_stage fixed point", Box::new(ccp_fixed_point)),
        ("zf_basis", Box::new(zf_basis_examples)),
        ("zf_optimal_V interior", Box::new(zf_power_interior)),
        ("zf_miso", Box::new(zf_miso_examples)),
        ("p12_feasible", Box::new(p12_examples)),
        ("maxmin_see", Box::new(maxmin_examples)),
        ("harness", Box::new(harness_examples)),
        ("cli contract", Box::new(cli_contract)),
        ("cli sweep examples", Box::new(move || cli_sweeps(sw))),
    ];
    let n = checks.len();
    let mut failed = Vec::new();
    for (name, f) in &checks {
        if let Err(e) = f() {
            failed.push(format!("{name}: {e}"));
        }
    }
    Verdict::new(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{n}/{n} example groups pass")
        } else {
            format!(
                "{}/{n} example groups pass; {}",
                n - failed.len(),
                failed.join("; ")
            )
        },
    )
}
