//! Truncated quantum differential equation of the blowup.
//!
//! With `ξ₁ = a·K_Y + D + ν·C` and `q = e^{−ψ·C}` the system reads
//!
//! ```text
//! t ξ₀' = 0
//! t a'  = ξ₀ / z
//! t D'  = 0
//! t ν'  = (ξ₀ + q t ν) / z
//! t ξ₂' = (K_Y²·a − ν) / z
//! ```
//!
//! It is integrated in `u = log t` with a Dormand–Prince 5(4) pair.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::ChernClass;
use crate::specfun::ei;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QdeParams {
    pub z: Complex64,
    pub q: Complex64,
    pub ky2: f64,
    pub c0: Complex64,
    pub c1_ky: Complex64,
}

impl QdeParams {
    pub fn new(z: Complex64, q: Complex64, ky2: f64, c0: Complex64, c1_ky: Complex64) -> Result<Self> {
        if z.norm() == 0.0 {
            return Err(Error::Domain("z = 0".into()));
        }
        if q.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("|q| = {} exceeds 1", q.norm())));
        }
        Ok(Self { z, q, ky2, c0, c1_ky })
    }

    /// Exponent `λ = q/z` of the closed-form solution.
    pub fn lambda(&self) -> Complex64 {
        self.q / self.z
    }
}

/// `q = e^{−ψ·C}`.
pub fn q_from_psi(psi_dot_c: Complex64) -> Complex64 {
    (-psi_dot_c).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QdeState {
    pub xi0: Complex64,
    pub a: Complex64,
    pub d: Vec<Complex64>,
    pub nu: Complex64,
    pub xi2: Complex64,
}

impl QdeState {
    pub fn zero(d_len: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { xi0: z, a: z, d: vec![z; d_len], nu: z, xi2: z }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            xi0: self.xi0 + o.xi0,
            a: self.a + o.a,
            d: self.d.iter().zip(&o.d).map(|(x, y)| x + y).collect(),
            nu: self.nu + o.nu,
            xi2: self.xi2 + o.xi2,
        }
    }
}

/// Time derivative of the state.
pub fn qde_rhs(state: &QdeState, t: f64, p: &QdeParams) -> Result<QdeState> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let zt = p.z * t;
    let zero = Complex64::new(0.0, 0.0);
    Ok(QdeState {
        xi0: zero,
        a: state.xi0 / zt,
        d: vec![zero; state.d.len()],
        nu: (state.xi0 + p.q * t * state.nu) / zt,
        xi2: (p.ky2 * state.a - state.nu) / zt,
    })
}

/// `t·ξ₂' = (K_Y²·a − ν)/z` read off from a state.
pub fn t_dxi2(state: &QdeState, p: &QdeParams) -> Complex64 {
    (p.ky2 * state.a - state.nu) / p.z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QdeTrajectory {
    pub t: Vec<f64>,
    pub states: Vec<QdeState>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl QdeTrajectory {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let d_len = self.states.first().map_or(0, |s| s.d.len());
        let mut header = vec!["t".to_string()];
        for name in ["xi0", "a"] {
            header.push(format!("re_{name}"));
            header.push(format!("im_{name}"));
        }
        for i in 0..d_len {
            header.push(format!("re_D{i}"));
            header.push(format!("im_D{i}"));
        }
        for name in ["nu", "xi2"] {
            header.push(format!("re_{name}"));
            header.push(format!("im_{name}"));
        }
        wr.write_record(&header).map_err(io_err)?;
        for (t, s) in self.t.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.17e}")];
            let mut push = |z: &Complex64| {
                row.push(format!("{:.17e}", z.re));
                row.push(format!("{:.17e}", z.im));
            };
            push(&s.xi0);
            push(&s.a);
            for d in &s.d {
                push(d);
            }
            push(&s.nu);
            push(&s.xi2);
            wr.write_record(&row).map_err(io_err)?;
        }
        wr.flush().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Integrated components `(a, ν, ξ₂)`.
type Vec3 = [Complex64; 3];

fn deriv_u(y: &Vec3, xi0: Complex64, u: f64, p: &QdeParams) -> Vec3 {
    let t = u.exp();
    [xi0 / p.z, (xi0 + p.q * t * y[1]) / p.z, (p.ky2 * y[0] - y[1]) / p.z]
}

fn axpy(y: &Vec3, h: f64, terms: &[(f64, &Vec3)]) -> Vec3 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step; returns the 5th-order solution and the error estimate.
fn dp_step(y: &Vec3, xi0: Complex64, u: f64, h: f64, p: &QdeParams) -> (Vec3, Vec3) {
    let k1 = deriv_u(y, xi0, u, p);
    let k2 = deriv_u(&axpy(y, h, &[(A21, &k1)]), xi0, u + C2 * h, p);
    let k3 = deriv_u(&axpy(y, h, &[(A31, &k1), (A32, &k2)]), xi0, u + C3 * h, p);
    let k4 = deriv_u(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]), xi0, u + C4 * h, p);
    let k5 = deriv_u(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]), xi0, u + C5 * h, p);
    let k6 = deriv_u(
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        xi0,
        u + h,
        p,
    );
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = deriv_u(&y5, xi0, u + h, p);
    let mut err = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
    }
    (y5, err)
}

/// Integrate from `t0` to `t1`, recording the state at every output time in
/// `t_eval` (which must lie in `[t0, t1]`) and at `t0` and `t1`.
///
/// The local error per step is kept below `tol·(1 + |y|)` componentwise.
pub fn integrate_at(p: &QdeParams, init: &QdeState, t0: f64, t1: f64, tol: f64, t_eval: &[f64]) -> Result<QdeTrajectory> {
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::Domain(format!("need 0 < t0 < t1, got [{t0}, {t1}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut outs: Vec<f64> = t_eval.iter().copied().filter(|t| *t > t0 && *t < t1).collect();
    outs.push(t1);
    outs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    outs.dedup();

    let (u0, u1) = (t0.ln(), t1.ln());
    let mut u = u0;
    let mut y: Vec3 = [init.a, init.nu, init.xi2];
    let mut h = ((u1 - u0) / 100.0).min(0.05);
    let h_min = (u1 - u0) * 1e-14;
    let mut traj = QdeTrajectory { t: vec![t0], states: vec![init.clone()], steps_accepted: 0, steps_rejected: 0 };
    let snapshot = |y: &Vec3| QdeState { xi0: init.xi0, a: y[0], d: init.d.clone(), nu: y[1], xi2: y[2] };

    for &t_out in &outs {
        let u_out = t_out.ln();
        while u < u_out {
            let last = u + h >= u_out;
            let step = if last { u_out - u } else { h };
            let (y_new, err) = dp_step(&y, init.xi0, u, step, p);
            let mut ratio: f64 = 0.0;
            for i in 0..3 {
                let scale = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                ratio = ratio.max(err[i].norm() / scale);
            }
            if !ratio.is_finite() {
                return Err(Error::Integration(format!("non-finite state near t = {}", u.exp())));
            }
            if ratio <= 1.0 {
                u = if last { u_out } else { u + step };
                y = y_new;
                traj.steps_accepted += 1;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = step * grow;
                }
            } else {
                traj.steps_rejected += 1;
                h = step * (0.9 * ratio.powf(-0.25)).clamp(0.1, 0.9);
                if h < h_min {
                    return Err(Error::Integration(format!("step size underflow near t = {}", u.exp())));
                }
            }
        }
        traj.t.push(t_out);
        traj.states.push(snapshot(&y));
    }
    Ok(traj)
}

/// Integrate with `n_out` output times spaced uniformly in `log t`.
pub fn integrate(p: &QdeParams, init: &QdeState, t0: f64, t1: f64, tol: f64) -> Result<QdeTrajectory> {
    integrate_at(p, init, t0, t1, tol, &log_grid(t0, t1, 401))
}

pub fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let (u0, u1) = (t0.ln(), t1.ln());
    (0..n).map(|i| (u0 + (u1 - u0) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Right side of the second-order equation for `ξ₂`:
/// `(1/z²)·{(K_Y² − 1)C₀ + q t (−K_Y²·a(t)) + z q t² ξ₂'}`, where
/// `−K_Y²·a(t) = −(K_Y² C₀/z) log t + K_Y·C₁`.
fn second_order_rhs(s: &QdeState, t: f64, p: &QdeParams) -> Complex64 {
    let t_xi2p = t_dxi2(s, p);
    ((p.ky2 - 1.0) * s.xi0 + p.q * t * (-p.ky2 * s.a) + p.z * p.q * t * t_xi2p) / (p.z * p.z)
}

/// Sup over interior samples of `|t(tξ₂')' − rhs|`.
///
/// `tξ₂'` is read from each state; its `log t`-derivative is taken by finite
/// differences (five-point when the samples are uniform in `log t`).
pub fn second_order_residual(traj: &QdeTrajectory, p: &QdeParams) -> Result<f64> {
    let n = traj.t.len();
    if n < 5 {
        return Err(Error::Domain(format!("need at least 5 samples, got {n}")));
    }
    let u: Vec<f64> = traj.t.iter().map(|t| t.ln()).collect();
    let g: Vec<Complex64> = traj.states.iter().map(|s| t_dxi2(s, p)).collect();
    let h = u[1] - u[0];
    let uniform = u.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    let mut worst: f64 = 0.0;
    if uniform {
        for i in 2..n - 2 {
            let d = (g[i - 2] - g[i - 1] * 8.0 + g[i + 1] * 8.0 - g[i + 2]) / (12.0 * h);
            worst = worst.max((d - second_order_rhs(&traj.states[i], traj.t[i], p)).norm());
        }
    } else {
        for i in 1..n - 1 {
            let (h0, h1) = (u[i] - u[i - 1], u[i + 1] - u[i]);
            let d = g[i - 1] * (-h1 / (h0 * (h0 + h1)))
                + g[i] * ((h1 - h0) / (h0 * h1))
                + g[i + 1] * (h0 / (h1 * (h0 + h1)));
            worst = worst.max((d - second_order_rhs(&traj.states[i], traj.t[i], p)).norm());
        }
    }
    Ok(worst)
}

/// `a·Ei(λt) + b`.
pub fn closed_form(a: Complex64, b: Complex64, lambda: Complex64, t: f64) -> Result<Complex64> {
    if a.norm() == 0.0 {
        return Ok(b);
    }
    Ok(a * ei(lambda * t)?.value + b)
}

/// Quantum corrections of the blowup: only `T_C` is non-zero, it kills
/// `H*(Y)` and sends `C` to `−C`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GwAction;

impl GwAction {
    /// `T_{nC}` applied to a class.
    pub fn apply(&self, n: i64, v: &ChernClass) -> ChernClass {
        let mut out = ChernClass::zero(v.rho());
        if n == 1 {
            out.e = -v.e;
        }
        out
    }
}
