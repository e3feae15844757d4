//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use blowup_paths::charges::YCharge;
use blowup_paths::paths::StartData;
use blowup_paths::sod::{Orientation, SodLabel};
use num_complex::Complex64;

#[allow(unused_imports)]
pub use blowup_paths::cli::oracle::ei_reference;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn y_charge() -> YCharge {
    YCharge { alpha: 0.5, beta: 0.2, b: vec![0.1], omega: vec![1.0] }
}

pub fn w2_start() -> StartData {
    StartData::StartInW2 { y_charge: y_charge(), r0: 0.7, s_max: 10.0 }
}

/// Boundary data with `B·C = −1`, so the start is of `(C_-1)` type.
pub fn boundary_start() -> StartData {
    StartData::StartInBoundary { b: blowup_paths::lattice::Divisor::new(vec![0.2], 1.0), omega: vec![1.0] }
}

/// State `(a, ν, ξ₂)` of the truncated system with constant `ξ₀`.
#[derive(Clone, Copy, Debug)]
pub struct Rk {
    pub a: Complex64,
    pub nu: Complex64,
    pub xi2: Complex64,
}

/// Classical RK4 in `u = log t` for
/// `a' = ξ₀/z`, `ν' = (ξ₀ + q t ν)/z`, `ξ₂' = (K_Y² a − ν)/z` (primes are `d/du`),
/// returning the state at each of `n + 1` uniform nodes in `u`.
pub fn rk4_log(
    z: Complex64,
    q: Complex64,
    ky2: f64,
    xi0: Complex64,
    init: Rk,
    t0: f64,
    t1: f64,
    n: usize,
) -> Vec<(f64, Rk)> {
    let f = |u: f64, y: Rk| -> Rk {
        let t = u.exp();
        Rk { a: xi0 / z, nu: (xi0 + q * t * y.nu) / z, xi2: (ky2 * y.a - y.nu) / z }
    };
    let add = |y: Rk, k: Rk, h: f64| Rk { a: y.a + k.a * h, nu: y.nu + k.nu * h, xi2: y.xi2 + k.xi2 * h };
    let (u0, u1) = (t0.ln(), t1.ln());
    let h = (u1 - u0) / n as f64;
    let mut y = init;
    let mut out = vec![(t0, y)];
    for i in 0..n {
        let u = u0 + h * i as f64;
        let k1 = f(u, y);
        let k2 = f(u + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = f(u + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = f(u + h, add(y, k3, h));
        y = Rk {
            a: y.a + (k1.a + k2.a * 2.0 + k3.a * 2.0 + k4.a) * (h / 6.0),
            nu: y.nu + (k1.nu + k2.nu * 2.0 + k3.nu * 2.0 + k4.nu) * (h / 6.0),
            xi2: y.xi2 + (k1.xi2 + k2.xi2 * 2.0 + k3.xi2 * 2.0 + k4.xi2) * (h / 6.0),
        };
        out.push(((u + h).exp(), y));
    }
    out
}

/// First sign change of `Im f` on `n` uniform cells of `[t0, t1]` with the
/// requested direction (`+1`: from negative to non-negative, `−1`: the reverse).
pub fn dense_first_crossing(f: impl Fn(f64) -> Complex64, t0: f64, t1: f64, n: usize, dir: i32) -> Option<(f64, f64)> {
    let h = (t1 - t0) / n as f64;
    let mut prev = f(t0).im;
    for i in 1..=n {
        let t = t0 + h * i as f64;
        let cur = f(t).im;
        let hit = if dir > 0 { prev < 0.0 && cur >= 0.0 } else { prev > 0.0 && cur <= 0.0 };
        if hit {
            return Some((t - h, t));
        }
        prev = cur;
    }
    None
}

/// Brute-force `min |Σ mᵢ e^{iπφᵢ}| / Σ mᵢ` over tuples of at most four
/// phases in `[θ, 1]` with masses in `{1, 2, 3}`.
///
/// Pairs use the full `10⁻³` grid of phases; triples and quadruples use every
/// 20th grid phase together with both endpoints.
pub fn brute_sector(theta: f64) -> f64 {
    let n = ((1.0 - theta) / 1e-3).round() as usize;
    if n == 0 {
        return 1.0;
    }
    let phases: Vec<f64> = (0..=n).map(|i| theta + (1.0 - theta) * i as f64 / n as f64).collect();
    let unit: Vec<Complex64> = phases.iter().map(|p| Complex64::from_polar(1.0, PI * p)).collect();
    let masses = [1.0, 2.0, 3.0];
    let mut best = f64::INFINITY;
    for i in 0..unit.len() {
        for j in i..unit.len() {
            for &m1 in &masses {
                for &m2 in &masses {
                    best = best.min((unit[i] * m1 + unit[j] * m2).norm() / (m1 + m2));
                }
            }
        }
    }
    let mut coarse: Vec<Complex64> = unit.iter().step_by(20).cloned().collect();
    coarse.push(*unit.last().unwrap());
    let k = coarse.len();
    for i in 0..k {
        for j in i..k {
            for l in j..k {
                best = best.min((coarse[i] + coarse[j] + coarse[l]).norm() / 3.0);
                for m in l..k {
                    best = best.min((coarse[i] + coarse[j] + coarse[l] + coarse[m]).norm() / 4.0);
                }
            }
        }
    }
    best
}

/// Position of a decomposition on the line of single mutations:
/// `⟨O_C(k), f^L_{k+1}⟩ ↦ 2k` and `⟨f^L_k, O_C(k)⟩ ↦ 2k − 1`.
pub fn line_position(s: &SodLabel) -> i64 {
    match s.orientation {
        Orientation::ExcLeft => 2 * s.k,
        Orientation::ExcRight => 2 * s.k - 1,
    }
}

pub fn label_at(p: i64) -> SodLabel {
    if p.rem_euclid(2) == 0 {
        SodLabel::exc_left(p.div_euclid(2))
    } else {
        SodLabel::exc_right((p + 1).div_euclid(2))
    }
}

/// Closed-form orbit: every label within `depth` steps on the mutation line.
pub fn closed_form_orbit(start: SodLabel, depth: i64) -> BTreeSet<SodLabel> {
    let p = line_position(&start);
    (p - depth..=p + depth).map(label_at).collect()
}

/// Twelve sweep points with `Im λ ∈ ±{0.1, 0.5, 1}` and `Re λ ∈ {1, 2}`.
pub fn sweep_lambdas() -> Vec<Complex64> {
    let mut v = Vec::new();
    for re in [1.0, 2.0] {
        for im in [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0] {
            v.push(c(re, im));
        }
    }
    v
}

/// JSON configuration of the twelve-point sweep from `W₂` with `s = 0`.
pub fn sweep_config_json() -> String {
    r#"{
  "path": {
    "start": {"family": "start-in-w2",
              "y_charge": {"alpha": 0.5, "beta": 0.2, "b": [0.1], "omega": [1.0]},
              "r0": 0.7},
    "s": [0.0],
    "lambda": {"re": [1.0, 2.0], "im": [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0]},
    "t0": "auto",
    "horizon": {"t0_factor": 100, "scale": 300000}
  }
}"#
    .to_string()
}

/// Fresh scratch directory under the system temp dir.
pub fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("blowup-paths-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}
