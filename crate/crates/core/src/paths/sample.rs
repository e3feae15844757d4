//! Sampling of tracked charges along a path.
//!
//! Every tracked charge is affine in `D(t) = w·ΔEi(λt)`, whose tangent
//! direction is `arg w + Im λ·t`. Over a step with tangent turn at most `π/8`
//! each `Z_t(E) = a·D(t) + b` traces an arc whose tangent turns by the same
//! `τ`. Such an arc lies in the lens of points seeing its chord at an angle of
//! at least `π − τ`, so if the chord subtends less than `π − 2τ` at the origin
//! the principal increment is the true one. Far out, once the asymptotic
//! form of `Ei` dominates, phases are read from the closed form
//! `arg(a·w) + Im λ·t − arg λ + arg S(λt) + arg(1 + ε)` with the `2πn`
//! offset matched at the switch.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{arg_step, PathEvaluator};
use crate::charges::{combine, log_derivative_from, PathCharge};
use crate::error::{Error, Result};
use crate::lattice::{chern_of, BaseObject, CatalogObject};
use crate::specfun::{asymptotic_factor, Scaled, ASYMPTOTIC_RADIUS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleOptions {
    pub samples: usize,
    /// Largest tangent turn of `D(t)` per step.
    pub max_turn: f64,
    /// Largest accepted principal phase increment per step; the lens bound
    /// `π − 2·(tangent turn)` applies on top of it when steps cannot shrink further.
    pub max_increment: f64,
    pub max_steps: usize,
    /// Allow the closed-form phase far out.
    pub analytic: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { samples: 2000, max_turn: PI / 8.0, max_increment: PI / 2.0, max_steps: 5_000_000, analytic: true }
    }
}

/// Tracked charges at the output times.
#[derive(Clone, Debug)]
pub struct PathSamples {
    pub t: Vec<f64>,
    pub bases: Vec<BaseObject>,
    /// `(a, b)` with `Z_t = a·D(t) + b`.
    pub coeffs: Vec<(f64, Complex64)>,
    pub z: Vec<Vec<Scaled>>,
    /// Lifted phases in units of π.
    pub phase: Vec<Vec<f64>>,
    /// `d/dt arg Z_t` in radians.
    pub rate: Vec<Vec<f64>>,
    pub steps: usize,
    /// Time from which phases come from the closed form.
    pub analytic_from: Option<f64>,
}

impl PathSamples {
    pub fn index(&self, base: &BaseObject) -> Option<usize> {
        self.bases.iter().position(|b| b == base)
    }

    pub fn horizon(&self) -> f64 {
        *self.t.last().expect("samples are never empty")
    }

    /// First sample of the last decade `[H/10, H]`.
    pub fn tail_start(&self) -> usize {
        let h = self.horizon() / 10.0;
        self.t.iter().position(|&t| t >= h).unwrap_or(0)
    }

    pub fn ln_abs(&self, i: usize, j: usize) -> f64 {
        self.z[i][j].ln_abs()
    }

    /// Phase of a shifted catalog object at sample `j`.
    pub fn object_phase(&self, obj: &CatalogObject, j: usize) -> Option<f64> {
        self.index(&obj.base).map(|i| self.phase[i][j] + obj.shift as f64)
    }
}

/// `n` log-spaced times from `t0` to `horizon`, both included.
pub fn sample_times(t0: f64, horizon: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && horizon > t0) {
        return Err(Error::Domain(format!("need 0 < T₀ < horizon, got T₀ = {t0}, horizon = {horizon}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let r = (horizon / t0).ln();
    let mut v: Vec<f64> = (0..n).map(|i| t0 * (r * i as f64 / (n - 1) as f64).exp()).collect();
    v[0] = t0;
    v[n - 1] = horizon;
    Ok(v)
}

/// Pieces of `Z_t = a·w·e^{λt}·S(λt)/(λt)·(1 + ε)` in the asymptotic regime.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AsymptoticParts {
    /// `arg(a·w) + Im λ·t − arg λ`.
    pub base: f64,
    /// `log|a·w| + Re λ·t − log|λt|`.
    pub ln_lead: f64,
    pub s: Complex64,
    pub eps: Complex64,
}

/// Asymptotic decomposition of `a·D(t) + b`, available when `Re λ > 0`,
/// `|λt| > 40` and `a ≠ 0`.
pub(crate) fn asymptotic_parts(charge: &PathCharge, a: f64, b: Complex64, t: f64) -> Option<AsymptoticParts> {
    let lambda = charge.lambda;
    let z = lambda * t;
    if !(lambda.re > 0.0 && z.norm() > ASYMPTOTIC_RADIUS) || a == 0.0 {
        return None;
    }
    let s = asymptotic_factor(z);
    let aw = charge.weight * a;
    if aw.norm() == 0.0 {
        return None;
    }
    let stokes = Complex64::new(0.0, PI * sgn0(lambda.im));
    let lead = Scaled::new(aw * s / z * Complex64::from_polar(1.0, lambda.im * t), lambda.re * t);
    let rest = charge.ei_t0().mul(-aw).add_value(aw * stokes + b);
    Some(AsymptoticParts {
        base: aw.arg() + lambda.im * t - lambda.arg(),
        ln_lead: aw.norm().ln() + lambda.re * t - z.norm().ln(),
        s,
        eps: rest.ratio(&lead),
    })
}

fn sgn0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Closed-form phase (radians, without the `2πn` offset), when the regime
/// holds for all later times: `Re λ·t > 1` makes `|ε|` decrease from then on.
fn closed_phase(charge: &PathCharge, a: f64, b: Complex64, t: f64) -> Option<f64> {
    if !(charge.lambda.re * t > 1.0) {
        return None;
    }
    let p = asymptotic_parts(charge, a, b, t)?;
    if (p.s - 1.0).norm() >= 0.25 || !(p.eps.norm() < 0.25) {
        return None;
    }
    Some(p.base + p.s.arg() + (1.0 + p.eps).arg())
}

/// Samples `Z_t` of the given base objects on `sample_times(T₀, horizon, n)`.
pub fn sample_path(ev: &PathEvaluator, bases: &[BaseObject], horizon: f64, opts: &SampleOptions) -> Result<PathSamples> {
    let times = sample_times(ev.t0(), horizon, opts.samples)?;
    let charge = ev.charge();
    let lambda = charge.lambda;
    let w = charge.weight;
    let coeffs: Vec<(f64, Complex64)> = bases
        .iter()
        .map(|b| charge.affine(&chern_of(ev.model(), &CatalogObject::new(b.clone(), 0))))
        .collect();
    let n = bases.len();
    let mut z_out = vec![Vec::with_capacity(times.len()); n];
    let mut ph_out = vec![Vec::with_capacity(times.len()); n];
    let mut rate_out = vec![Vec::with_capacity(times.len()); n];

    let eval_all = |t: f64| -> Result<Vec<Scaled>> {
        let d = charge.delta(t)?;
        Ok(coeffs.iter().map(|&(a, b)| combine(a, b, &d)).collect())
    };

    let mut t = times[0];
    let mut z = eval_all(t)?;
    let mut arg: Vec<f64> = Vec::with_capacity(n);
    for b in bases {
        arg.push(PI * ev.initial_phase(b)?);
    }
    let mut offsets: Option<Vec<f64>> = None;
    let mut analytic_from = None;
    let turn = if lambda.im == 0.0 { f64::INFINITY } else { opts.max_turn / lambda.im.abs() };
    let mut steps = 0usize;

    let mut record = |z: &[Scaled], arg: &[f64], t: f64| {
        for i in 0..n {
            let (a, _) = coeffs[i];
            z_out[i].push(z[i]);
            ph_out[i].push(arg[i] / PI);
            rate_out[i].push(log_derivative_from(lambda, w, a, &z[i], t).im);
        }
    };
    record(&z, &arg, t);

    for &target in &times[1..] {
        if let Some(off) = &offsets {
            z = eval_all(target)?;
            for i in 0..n {
                let (a, b) = coeffs[i];
                if a != 0.0 {
                    let p = closed_phase(charge, a, b, target).ok_or_else(|| {
                        Error::Integration(format!("closed-form phase lost validity at t = {target}"))
                    })?;
                    arg[i] = p + off[i];
                }
            }
            t = target;
            record(&z, &arg, t);
            continue;
        }
        while t < target {
            let mut h = (target - t).min(turn);
            let (next, incr) = loop {
                let tn = if h >= target - t { target } else { t + h };
                let cand = eval_all(tn)?;
                let incr: Vec<f64> = cand.iter().zip(&z).map(|(c, o)| arg_step(c, o)).collect();
                let lens = PI - 2.0 * lambda.im.abs() * (tn - t) - 1e-9;
                let floor = h * 0.5 < 1e-13 * t;
                let cap = if floor { lens } else { opts.max_increment.min(lens) };
                if incr.iter().all(|d| d.abs() < cap) {
                    break ((tn, cand), incr);
                }
                h *= 0.5;
                if h < 1e-13 * t {
                    let worst = (0..n).max_by(|&i, &j| incr[i].abs().total_cmp(&incr[j].abs())).unwrap_or(0);
                    if z[worst].ln_abs() < -20.0 || lambda.im == 0.0 {
                        return Err(Error::Degenerate(format!(
                            "Z_t({}) passes through 0 near t = {t}",
                            CatalogObject::new(bases[worst].clone(), 0)
                        )));
                    }
                    return Err(Error::Integration(format!("grid too coarse for unwrapping near t = {t}")));
                }
            };
            t = next.0;
            z = next.1;
            for (a, d) in arg.iter_mut().zip(&incr) {
                *a += d;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration(format!("step budget {} exhausted at t = {t}", opts.max_steps)));
            }
        }
        record(&z, &arg, t);
        if opts.analytic && lambda.re > 0.0 {
            offsets = switch_offsets(charge, &coeffs, &arg, t);
            if offsets.is_some() {
                analytic_from = Some(t);
            }
        }
    }

    Ok(PathSamples {
        t: times,
        bases: bases.to_vec(),
        coeffs,
        z: z_out,
        phase: ph_out,
        rate: rate_out,
        steps,
        analytic_from,
    })
}

/// `2πn` offsets between tracked and closed-form phases, if every moving
/// charge is in the closed-form regime and the offsets are integral.
fn switch_offsets(charge: &PathCharge, coeffs: &[(f64, Complex64)], arg: &[f64], t: f64) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(arg.len());
    for (&(a, b), &tracked) in coeffs.iter().zip(arg) {
        if a == 0.0 {
            out.push(0.0);
            continue;
        }
        let p = closed_phase(charge, a, b, t)?;
        let k = ((tracked - p) / (2.0 * PI)).round();
        if (tracked - p - 2.0 * PI * k).abs() > 1e-6 {
            return None;
        }
        out.push(2.0 * PI * k);
    }
    Some(out)
}
