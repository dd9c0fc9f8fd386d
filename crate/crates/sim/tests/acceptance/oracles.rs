//! Brute-force reference optimisers. They only evaluate the closed-form
//! metrics, never the solvers under test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlc_core::metrics::{self, Receiver};
use vlc_core::unknown_csi::DesignConfig;
use vlc_core::{build_channel, ChannelState, PrecoderSolution, RoomScenario, SchemeKind};

pub const SCHEMES: [SchemeKind; 3] = [
    SchemeKind::FixedSiso,
    SchemeKind::SelectiveSiso,
    SchemeKind::Miso,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bob and `k` Eves uniform over the floor, redrawn until Bob sees a luminaire.
pub fn random_channel(
    rng: &mut ChaCha8Rng,
    sc: &RoomScenario,
    scheme: SchemeKind,
    k: usize,
) -> ChannelState {
    let (hx, hy) = (sc.length / 2.0, sc.width / 2.0);
    loop {
        let mut xy = || (rng.gen_range(-hx..hx), rng.gen_range(-hy..hy));
        let bob = xy();
        let eves: Vec<(f64, f64)> = (0..k).map(|_| xy()).collect();
        if let Ok(ch) = build_channel(sc, bob, &eves, scheme) {
            return ch;
        }
    }
}

/// Projected compass search with extra random directions, restarted from
/// every point in `starts`. `value` returns `-∞` outside the feasible set.
pub fn compass_max(
    starts: Vec<Vec<f64>>,
    scale: f64,
    project: &dyn Fn(&mut [f64]),
    value: &dyn Fn(&[f64]) -> f64,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for mut z in starts {
        let dim = z.len();
        project(&mut z);
        let mut v = value(&z);
        let mut step = 0.25 * scale;
        while step > 1e-9 * scale {
            let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(6 * dim);
            for i in 0..dim {
                for s in [-1.0, 1.0] {
                    let mut d = vec![0.0; dim];
                    d[i] = s;
                    dirs.push(d);
                }
            }
            for _ in 0..4 * dim {
                dirs.push((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
            }
            let mut improved = false;
            for d in &dirs {
                let mut t: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + step * b).collect();
                project(&mut t);
                let tv = value(&t);
                if tv > v {
                    v = tv;
                    z = t;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, z);
        }
    }
    best
}

fn random_starts(rng: &mut ChaCha8Rng, first: Vec<f64>, n: usize, delta: f64) -> Vec<Vec<f64>> {
    let dim = first.len();
    let mut starts = vec![first];
    for _ in 1..n {
        starts.push((0..dim).map(|_| rng.gen_range(-delta..delta)).collect());
    }
    starts
}

/// Largest unclamped min-SEE over `v` and one AN column per Eve (or none),
/// under the per-luminaire amplitude limits.
pub fn see_oracle(ch: &ChannelState, sc: &RoomScenario, with_an: bool, seed: u64) -> f64 {
    let delta = sc.delta_dc();
    let nv = ch.bob.info.len();
    let nw = ch.bob.jam.len();
    let cols = if with_an { ch.eves.len() } else { 0 };
    let split = |z: &[f64]| {
        let an = (0..cols)
            .map(|c| z[nv + c * nw..nv + (c + 1) * nw].to_vec())
            .collect();
        PrecoderSolution::new(ch.scheme, z[..nv].to_vec(), an)
    };
    let project = |z: &mut [f64]| {
        for v in z[..nv].iter_mut() {
            *v = v.clamp(-delta, delta);
        }
        for n in 0..nw {
            let row: f64 = (0..cols).map(|c| z[nv + c * nw + n].abs()).sum();
            if row > delta {
                for c in 0..cols {
                    z[nv + c * nw + n] *= delta / row;
                }
            }
        }
    };
    let value = |z: &[f64]| metrics::min_see_raw(sc, ch, &split(z));
    let mut r = rng(seed);
    let first = (0..nv + cols * nw)
        .map(|i| if i < nv { delta } else { 0.0 })
        .collect();
    let starts = random_starts(&mut r, first, 24, delta);
    compass_max(starts, delta, &project, &value, &mut r).0
}

/// Largest Bob EE over a free `v` and AN vector `w` under the SINR and AN
/// power floors of `cfg`.
pub fn ee_oracle(ch: &ChannelState, sc: &RoomScenario, cfg: &DesignConfig, seed: u64) -> f64 {
    let delta = sc.delta_dc();
    let nv = ch.bob.info.len();
    let nw = ch.bob.jam.len();
    let split =
        |z: &[f64]| PrecoderSolution::new(ch.scheme, z[..nv].to_vec(), vec![z[nv..].to_vec()]);
    let project = |z: &mut [f64]| {
        for v in z.iter_mut() {
            *v = v.clamp(-delta, delta);
        }
    };
    let value = |z: &[f64]| {
        let sol = split(z);
        let w2: f64 = z[nv..].iter().map(|w| w * w).sum();
        if w2 < cfg.p_th || metrics::sinr(ch, &sol, Receiver::Bob) < cfg.delta_b {
            return f64::NEG_INFINITY;
        }
        metrics::ee_bob(sc, ch, &sol)
    };
    let mut r = rng(seed);
    let w0 = (cfg.p_th / nw as f64).sqrt().min(delta) * 1.001;
    let first = (0..nv + nw)
        .map(|i| if i < nv { delta } else { w0.min(delta) })
        .collect();
    let starts = random_starts(&mut r, first, 24, delta);
    compass_max(starts, delta, &project, &value, &mut r).0
}

/// Unit projection of the all-ones vector onto the null space of `h`.
pub fn null_direction(h: &[f64]) -> Vec<f64> {
    let hh: f64 = h.iter().map(|x| x * x).sum();
    let c = h.iter().sum::<f64>() / hh;
    let p: Vec<f64> = h.iter().map(|x| 1.0 - c * x).collect();
    let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.iter().map(|x| x / n).collect()
}

/// Largest Bob EE of a MISO design whose AN is `r·w̃` along Bob's null space.
pub fn zf_miso_oracle(ch: &ChannelState, sc: &RoomScenario, cfg: &DesignConfig, seed: u64) -> f64 {
    let delta = sc.delta_dc();
    let nv = ch.bob.info.len();
    let dir = null_direction(&ch.bob.jam);
    let m = dir.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let r_lo = cfg.p_th.sqrt();
    let r_hi = delta / m;
    if r_lo > r_hi {
        return f64::NEG_INFINITY;
    }
    let project = |z: &mut [f64]| {
        for v in z[..nv].iter_mut() {
            *v = v.clamp(-delta, delta);
        }
        z[nv] = z[nv].clamp(r_lo, r_hi);
    };
    let value = |z: &[f64]| {
        let w = dir.iter().map(|d| d * z[nv]).collect();
        let sol = PrecoderSolution::new(ch.scheme, z[..nv].to_vec(), vec![w]);
        if metrics::sinr(ch, &sol, Receiver::Bob) < cfg.delta_b {
            return f64::NEG_INFINITY;
        }
        metrics::ee_bob(sc, ch, &sol)
    };
    let mut r = rng(seed);
    let mut first = vec![delta; nv];
    first.push(r_lo);
    let starts = random_starts(&mut r, first, 24, delta);
    compass_max(starts, delta, &project, &value, &mut r).0
}
