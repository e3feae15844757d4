//! Quadrature reference for `Ei`, written without the series or asymptotic
//! machinery of `specfun`.
//!
//! * `Re z ≥ 0` or `|z| ≤ 2`: `Ei(z) = γ + log z + ∫₀¹ (e^{zs} − 1)/s ds`,
//!   with `log` taken on the real axis as `log|z|` (principal value).
//! * otherwise: `Ei(z) = −E₁(−z) + iπ·sgn(Im z)` with
//!   `E₁(w) = e^{−w} ∫₀^∞ e^{−u}/(w + u) du`.

use std::f64::consts::PI;

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss–Kronrod 7/15 on `[a, b]`: (Kronrod value, |Kronrod − Gauss|).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive G7K15: splits the worst interval until the summed error
/// estimate is below `rel_tol·max(|I|, 1)` or 4000 intervals are in use.
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Complex64 {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    while parts.len() < 4000 {
        let total: Complex64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.norm().max(1.0) {
            break;
        }
        let (i, _) = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

fn principal_log(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re.abs().ln(), 0.0)
    } else {
        z.ln()
    }
}

/// Reference value of the principal `Ei(z)`, `z ≠ 0`.
pub fn ei_reference(z: Complex64) -> Complex64 {
    if z.re >= 0.0 || z.norm() <= 2.0 {
        let f = |s: f64| {
            if s == 0.0 {
                z
            } else {
                ((z * s).exp() - 1.0) / s
            }
        };
        let integral = integrate(&f, 0.0, 1.0, 1e-15);
        Complex64::new(EULER_GAMMA, 0.0) + principal_log(z) + integral
    } else {
        let w = -z;
        let f = |u: f64| Complex64::new((-u).exp(), 0.0) / (w + u);
        let tail = integrate(&f, 0.0, 1.0, 1e-15) + integrate(&f, 1.0, 10.0, 1e-15) + integrate(&f, 10.0, 80.0, 1e-15);
        let e1 = (-w).exp() * tail;
        let stokes = if z.im > 0.0 {
            PI
        } else if z.im < 0.0 {
            -PI
        } else {
            0.0
        };
        -e1 + Complex64::new(0.0, stokes)
    }
}
