//! The four standing assumptions on `O_C(−1)` (and `O_C`) along a path.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::fit::{linear_fit, LinearFit};
use super::sample::{asymptotic_parts, sample_path, PathSamples, SampleOptions};
use super::PathEvaluator;
use crate::chambers::Evidence;
use crate::error::{Error, Result};
use crate::lattice::{BaseObject, CatalogObject};

/// Smallest `|Z|` accepted as non-vanishing.
const NONZERO_MARGIN: f64 = 1e-8;
/// Relative tolerance on fitted slopes.
const SLOPE_TOL: f64 = 0.05;
const R2_MIN: f64 = 0.999;
/// Agreement of `ℓ/(1+|ℓ|)` with its closed form over the last decade.
const LIMIT_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    fn new(evidence: Vec<Evidence>) -> Self {
        Self { holds: evidence.iter().all(|e| e.holds), evidence }
    }
}

/// Eventual monotonicity and divergence of one tracked phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneCert {
    pub object: CatalogObject,
    /// `+1` increasing, `−1` decreasing, `0` constant.
    pub direction: i8,
    /// Last sample time with a rate of the wrong sign (or `T₀`).
    pub monotone_from: f64,
    pub monotone: bool,
    /// Fit of `arg Z_t` (radians) against `t` over the last decade.
    pub fit: LinearFit,
    pub fit_ok: bool,
    /// Distance of `arg Z_H` from `arg(a·w) + Im λ·H − arg λ` modulo `2π`.
    pub asymptotic_residual: f64,
    /// Closed-form bound `1.1·(2/|λH| + |ε_H|)` on that distance.
    pub asymptotic_bound: f64,
    pub asymptotic_ok: bool,
    pub diverges: bool,
}

impl MonotoneCert {
    pub fn decreasing(&self) -> bool {
        self.direction < 0 && self.monotone && self.diverges
    }

    pub fn increasing(&self) -> bool {
        self.direction > 0 && self.monotone && self.diverges
    }
}

/// Certificate for the tracked base with index `i`.
pub fn monotone_cert(ev: &PathEvaluator, s: &PathSamples, i: usize) -> MonotoneCert {
    let lambda = ev.lambda();
    let h = s.horizon();
    let last = s.t.len() - 1;
    let rates = &s.rate[i];
    let dir_f = rates[last].signum();
    let direction = if rates[last] == 0.0 { 0 } else { dir_f as i8 };
    let monotone_from = (0..=last)
        .rev()
        .find(|&j| direction == 0 || rates[j] * dir_f <= 0.0)
        .map_or(s.t[0], |j| s.t[j]);
    let monotone = direction != 0 && monotone_from <= h / 10.0;

    let tail = s.tail_start();
    let x = &s.t[tail..];
    let y: Vec<f64> = s.phase[i][tail..].iter().map(|p| p * PI).collect();
    let fit = linear_fit(x, &y);
    let fit_ok = fit.r2 > R2_MIN
        && fit.slope * dir_f > 0.0
        && lambda.im != 0.0
        && (fit.slope - lambda.im).abs() <= SLOPE_TOL * lambda.im.abs();

    let (a, b) = s.coeffs[i];
    let (asymptotic_residual, asymptotic_bound) = match asymptotic_parts(ev.charge(), a, b, h) {
        Some(p) => {
            let r = PI * s.phase[i][last] - p.base;
            let k = (r / (2.0 * PI)).round();
            let bound = 1.1 * (2.0 / (lambda.norm() * h) + p.eps.norm()) + 1e-9;
            ((r - 2.0 * PI * k).abs(), bound)
        }
        None => (f64::NAN, f64::NAN),
    };
    let asymptotic_ok = asymptotic_residual <= asymptotic_bound;
    let object = CatalogObject::new(s.bases[i].clone(), 0);
    MonotoneCert {
        object,
        direction,
        monotone_from,
        monotone,
        fit,
        fit_ok,
        asymptotic_residual,
        asymptotic_bound,
        asymptotic_ok,
        diverges: monotone && fit_ok && asymptotic_ok,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub horizon: f64,
    pub samples: usize,
    /// (1) `Z_t(O_C(−1))` and `Z_t(O_C)` stay away from 0.
    pub nonvanishing: Verdict,
    /// (2) `arg Z_t(O_C(−1))` decreases to `−∞` (for `Im λ > 0`, `arg Z_t(O_C)` increases to `+∞`).
    pub monotone: Verdict,
    pub monotone_cert: MonotoneCert,
    /// (3) `|Z_t(O_C(−1))| → ∞`.
    pub growth: Verdict,
    pub growth_fit: LinearFit,
    /// (4) `ℓ_t/(1+|ℓ_t|)` of `O_C(−1)` converges.
    pub limit: Verdict,
    /// `ℓ_H/(1+|ℓ_H|)`.
    pub limit_value: Complex64,
    /// Distance of `limit_value` from `λ/|λ|`.
    pub limit_error: f64,
    /// `sup |n_t − n_H|` over the last decade.
    pub cauchy_tail: f64,
    pub all_hold: bool,
}

/// Samples `O_C(−1)` and `O_C` on `grid` log-spaced times up to `horizon`
/// and evaluates the four assumptions.
pub fn check_assumptions(ev: &PathEvaluator, horizon: f64, grid: usize) -> Result<AssumptionReport> {
    if !(horizon > ev.t0()) {
        return Err(Error::Domain(format!("horizon {horizon} must exceed T₀ = {}", ev.t0())));
    }
    if grid < 20 {
        return Err(Error::Domain(format!("grid of {grid} samples is too coarse")));
    }
    let opts = SampleOptions { samples: grid, ..SampleOptions::default() };
    let s = sample_path(ev, &[BaseObject::Curve(-1), BaseObject::Curve(0)], horizon, &opts)?;
    check_assumptions_on(ev, &s)
}

/// Normalized `ℓ/(1+|ℓ|)`.
pub(crate) fn normalized(l: Complex64) -> Complex64 {
    l / (1.0 + l.norm())
}

pub fn check_assumptions_on(ev: &PathEvaluator, s: &PathSamples) -> Result<AssumptionReport> {
    let m1 = s
        .index(&BaseObject::Curve(-1))
        .ok_or_else(|| Error::Config("samples do not track O_C(−1)".into()))?;
    let m0 = s.index(&BaseObject::Curve(0)).ok_or_else(|| Error::Config("samples do not track O_C".into()))?;
    let lambda = ev.lambda();
    let h = s.horizon();
    let last = s.t.len() - 1;
    let tail = s.tail_start();

    let min_ln = |i: usize| s.z[i].iter().map(|z| z.ln_abs()).fold(f64::INFINITY, f64::min);
    let (l1, l0) = (min_ln(m1), min_ln(m0));
    let nonvanishing = Verdict::new(vec![
        Evidence::new("min |Z(O_C(−1))|", l1.exp(), l1 > NONZERO_MARGIN.ln()),
        Evidence::new("min |Z(O_C)|", l0.exp(), l0 > NONZERO_MARGIN.ln()),
    ]);

    let watched = if lambda.im > 0.0 { m0 } else { m1 };
    let cert = monotone_cert(ev, s, watched);
    let want = if lambda.im > 0.0 { cert.increasing() } else { cert.decreasing() };
    let monotone = Verdict::new(vec![
        Evidence::new("Im λ", lambda.im, lambda.im != 0.0),
        Evidence::new("monotone from t", cert.monotone_from, cert.monotone),
        Evidence::new("arg slope", cert.fit.slope, cert.fit_ok),
        Evidence::new("arg fit R²", cert.fit.r2, cert.fit.r2 > R2_MIN),
        Evidence::new("asymptotic residual", cert.asymptotic_residual, cert.asymptotic_ok),
        Evidence::new("direction", cert.direction as f64, want),
    ]);

    let x = &s.t[tail..];
    let y: Vec<f64> = s.z[m1][tail..].iter().map(|z| z.ln_abs()).collect();
    let growth_fit = linear_fit(x, &y);
    let growth = Verdict::new(vec![
        Evidence::new("Re λ", lambda.re, lambda.re > 0.0),
        Evidence::new("log|Z| slope", growth_fit.slope, (growth_fit.slope - lambda.re).abs() <= SLOPE_TOL * lambda.re),
        Evidence::new("log|Z| fit R²", growth_fit.r2, growth_fit.r2 > R2_MIN),
    ]);

    let ell = |j: usize| Complex64::new(s.z[m1][j].ln_abs(), PI * s.phase[m1][j]);
    let n_h = normalized(ell(last));
    let mut cauchy_tail: f64 = 0.0;
    let mut closed_gap: f64 = 0.0;
    let (a, b) = s.coeffs[m1];
    for j in tail..=last {
        let n = normalized(ell(j));
        cauchy_tail = cauchy_tail.max((n - n_h).norm());
        match asymptotic_parts(ev.charge(), a, b, s.t[j]) {
            Some(p) => {
                let r = PI * s.phase[m1][j] - p.base;
                let k = (r / (2.0 * PI)).round();
                let pred = Complex64::new(p.ln_lead + p.s.norm().ln(), p.base + p.s.arg() + 2.0 * PI * k);
                closed_gap = closed_gap.max((n - normalized(pred)).norm());
            }
            None => closed_gap = f64::INFINITY,
        }
    }
    let unit = lambda / lambda.norm();
    let limit_error = (n_h - unit).norm();
    let limit = Verdict::new(vec![
        Evidence::new("closed-form gap of ℓ/(1+|ℓ|)", closed_gap, closed_gap < LIMIT_TOL),
        Evidence::new("Cauchy tail of ℓ/(1+|ℓ|)", cauchy_tail, cauchy_tail.is_finite()),
        Evidence::new("|n_H − λ/|λ||", limit_error, limit_error.is_finite()),
    ]);

    let all_hold = nonvanishing.holds && monotone.holds && growth.holds && limit.holds;
    Ok(AssumptionReport {
        horizon: h,
        samples: s.t.len(),
        nonvanishing,
        monotone,
        monotone_cert: cert,
        growth,
        growth_fit,
        limit,
        limit_value: n_h,
        limit_error,
        cauchy_tail,
        all_hold,
    })
}
