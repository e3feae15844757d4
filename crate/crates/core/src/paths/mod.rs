//! Paths of central charges `Z_t = w·(Ei(λt) − Ei(λT₀))·ch₁^{−sC}·C + Z_{0,sC}`,
//! sampled with continuously tracked phases, together with the assumption
//! checks, quasi-convergence diagnostics and the induced decomposition.

mod assumptions;
mod extend;
mod fit;
mod qc;
mod sample;

pub use assumptions::{check_assumptions, check_assumptions_on, AssumptionReport, MonotoneCert, Verdict};
pub use extend::{extend_into_geometric, path_wall_crossing, GeometricExtension};
pub use fit::{linear_fit, LinearFit};
pub use qc::{
    induced_sod, quasi_convergence_report, quasi_convergence_report_on, regions, tracked_bases, trajectory_rows,
    ItineraryEntry, ObjectVerdict, QcOptions, QcReport, Relation, RelationKind, TrajectoryRow, HN_MODEL,
};
pub use sample::{sample_path, sample_times, PathSamples, SampleOptions};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chambers::{ck_window, classify_snapshot, Evidence, RegionLabel, RegionTag, Wall};
use crate::charges::{geometric_charge, glued_charge, CentralCharge, PathCharge, YCharge};
use crate::error::{Error, Result};
use crate::lattice::{chern_of, BaseObject, CatalogObject, ChernClass, Divisor, SurfaceModel};
use crate::specfun::{ei_scaled, find_t0, LambdaBox, Scaled};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathFamily {
    StartInBoundary,
    StartInW2,
    IntroG,
}

/// Data fixing `Z₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum StartData {
    /// `Z₀ = Z_{B,f*ω}`.
    StartInBoundary { b: Divisor, omega: Vec<f64> },
    /// `Z₀` glued from `Z_Y` and `τ_{λ₀}` with `λ₀ = log r₀ + 2πi`, so that
    /// `Z₀(O_C) = r₀` with phase 2 and `Z₀(O_C(−1)) = r₀ + 1` with phase 0.
    StartInW2 {
        y_charge: YCharge,
        r0: f64,
        #[serde(default = "default_s_max")]
        s_max: f64,
    },
    /// `Z_t = Ei(λt)·ch₁(E)·C + Z₀(E)` with `Z₀ = Z_{B,f*ω}`.
    IntroG { b: Divisor, omega: Vec<f64> },
}

fn default_s_max() -> f64 {
    10.0
}

fn default_margin() -> f64 {
    0.1
}

impl StartData {
    pub fn family(&self) -> PathFamily {
        match self {
            StartData::StartInBoundary { .. } => PathFamily::StartInBoundary,
            StartData::StartInW2 { .. } => PathFamily::StartInW2,
            StartData::IntroG { .. } => PathFamily::IntroG,
        }
    }

    pub fn z0(&self, model: &SurfaceModel) -> Result<CentralCharge> {
        match self {
            StartData::StartInBoundary { b, omega } | StartData::IntroG { b, omega } => {
                check_len(model, &b.b, "B")?;
                check_len(model, omega, "ω")?;
                geometric_charge(model, b, &Divisor::new(omega.clone(), 0.0))
            }
            StartData::StartInW2 { y_charge, r0, .. } => {
                check_len(model, &y_charge.b, "B_Y")?;
                check_len(model, &y_charge.omega, "ω_Y")?;
                if !(*r0 > 0.0) {
                    return Err(Error::Window(format!("r₀ = {r0} must be positive")));
                }
                let lambda0 = Complex64::new(r0.ln(), 2.0 * PI);
                Ok(glued_charge(model, y_charge, lambda0, -1))
            }
        }
    }
}

fn check_len(model: &SurfaceModel, v: &[f64], what: &str) -> Result<()> {
    if v.len() != model.rho() {
        return Err(Error::InvalidModel(format!("{what} has {} entries, expected ρ = {}", v.len(), model.rho())));
    }
    Ok(())
}

/// User-facing path parameters; `t0` and `weight` are resolved when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRequest {
    pub start: StartData,
    pub s: f64,
    pub lambda: Complex64,
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub weight: Option<Complex64>,
    #[serde(default = "default_margin")]
    pub margin_scale: f64,
}

impl PathRequest {
    pub fn new(start: StartData, s: f64, lambda: Complex64) -> Self {
        Self { start, s, lambda, t0: None, weight: None, margin_scale: default_margin() }
    }

    pub fn resolve(&self, model: &SurfaceModel) -> Result<PathConfig> {
        let z0 = self.start.z0(model)?;
        let t0 = match self.t0 {
            Some(t) => t,
            None => find_t0(&LambdaBox::point(self.lambda), 1.0)?,
        };
        let weight = match self.weight {
            Some(w) => w,
            None => resolve_weight(self.start.family(), self.lambda, t0, self.margin_scale)?.weight,
        };
        Ok(PathConfig {
            model: model.clone(),
            start: self.start.clone(),
            s: self.s,
            lambda: self.lambda,
            t0,
            weight,
            z0,
        })
    }
}

/// Fully resolved path parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub model: SurfaceModel,
    pub start: StartData,
    pub s: f64,
    pub lambda: Complex64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub weight: Complex64,
    #[serde(rename = "Z0")]
    pub z0: CentralCharge,
}

impl PathConfig {
    pub fn family(&self) -> PathFamily {
        self.start.family()
    }
}

/// Resolved weight with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightResolution {
    pub weight: Complex64,
    pub margin: f64,
    /// Infimum (`Im λ > 0`) or supremum (`Im λ < 0`) of the lifted `arg ΔEi`.
    pub extremum: Option<f64>,
    pub extremum_t: Option<f64>,
    /// Sampled `(t, arg ΔEi)` profile.
    pub profile: Vec<(f64, f64)>,
}

/// Weight `w(s, λ, Z₀)` for a family.
///
/// Boundary paths use `w = Im λ`. Paths from `W₂` use `w = e^{iθ}` placing the
/// lifted phase of `w·ΔEi` above `−π + margin` when `Im λ > 0` and below
/// `π − margin` when `Im λ < 0`, with `margin = margin_scale·min(|Im λ|, 1)`.
/// The `g` family has `w = 1`.
pub fn resolve_weight(family: PathFamily, lambda: Complex64, t0: f64, margin_scale: f64) -> Result<WeightResolution> {
    let plain = |w: f64| WeightResolution {
        weight: Complex64::new(w, 0.0),
        margin: 0.0,
        extremum: None,
        extremum_t: None,
        profile: Vec::new(),
    };
    match family {
        PathFamily::StartInBoundary => Ok(plain(lambda.im)),
        PathFamily::IntroG => Ok(plain(1.0)),
        PathFamily::StartInW2 => {
            if lambda.im == 0.0 {
                return Ok(plain(-1.0));
            }
            if !(margin_scale >= 0.0 && margin_scale < 1.0) {
                return Err(Error::Config(format!("margin_scale = {margin_scale} is outside [0, 1)")));
            }
            let margin = margin_scale * lambda.im.abs().min(1.0);
            let ext = delta_ei_extremum(lambda, t0)?;
            let theta = if lambda.im > 0.0 { -PI - ext.value + margin } else { PI - ext.value - margin };
            Ok(WeightResolution {
                weight: Complex64::from_polar(1.0, theta),
                margin,
                extremum: Some(ext.value),
                extremum_t: Some(ext.t),
                profile: ext.profile,
            })
        }
    }
}

struct Extremum {
    value: f64,
    t: f64,
    profile: Vec<(f64, f64)>,
}

fn delta_ei(lambda: Complex64, e0: &Scaled, t: f64) -> Result<Scaled> {
    Ok(ei_scaled(lambda * t)?.add(&e0.mul(Complex64::new(-1.0, 0.0))))
}

/// Principal difference `arg(a/b)` of two scaled numbers.
pub(crate) fn arg_step(new: &Scaled, old: &Scaled) -> f64 {
    (new.mantissa * old.mantissa.conj()).arg()
}

/// Infimum (`Im λ > 0`) or supremum (`Im λ < 0`) over `t > T₀` of the lifted
/// `arg(Ei(λt) − Ei(λT₀))`, starting from the principal direction `Im λ·T₀`.
///
/// Steps keep the tangent turn of the curve below `π/8` and every principal
/// increment below `π/2` (below `π − 2·turn` once steps reach float
/// resolution), so the lift is exact. The search stops once
/// `|Ei(λt)| ≥ 10|Ei(λT₀)|`, the `Ei` phase moves in the direction of `Im λ`,
/// and the lift has moved `0.21` past the extremum: from then on the phase of
/// `1 − Ei(λT₀)/Ei(λt)` stays within `asin(0.1) < 0.105`.
fn delta_ei_extremum(lambda: Complex64, t0: f64) -> Result<Extremum> {
    let sign = lambda.im.signum();
    let e0 = ei_scaled(lambda * t0)?;
    let e0_ln = e0.ln_abs();
    let turn = (PI / 8.0) / lambda.im.abs();
    let mut t = t0 * (1.0 + 1e-9);
    let mut cur = delta_ei(lambda, &e0, t)?;
    let start_dir = Complex64::from_polar(1.0, lambda.im * t0).arg();
    let mut arg = start_dir + (cur.mantissa * Complex64::from_polar(1.0, -start_dir)).arg();
    let mut profile = vec![(t, arg)];
    let mut best = (arg, t, 0usize);
    let t_cap = t0 * 1e5;
    for _ in 0..2_000_000 {
        let mut h = turn.min(0.25 * t);
        let (next, step) = loop {
            let cand = delta_ei(lambda, &e0, t + h)?;
            let d = arg_step(&cand, &cur);
            let cap = if h * 0.5 < 1e-13 * t { PI - 2.0 * lambda.im.abs() * h - 1e-9 } else { PI / 2.0 };
            if d.abs() < cap {
                break (cand, d);
            }
            h *= 0.5;
            if h < 1e-14 * t {
                return Err(Error::Inconclusive(format!("weight search: grid too coarse near t = {t}")));
            }
        };
        t += h;
        cur = next;
        arg += step;
        profile.push((t, arg));
        if sign * (arg - best.0) < 0.0 {
            best = (arg, t, profile.len() - 1);
        }
        let grown = ei_scaled(lambda * t)?.ln_abs() >= e0_ln + 10f64.ln();
        let past = sign * (arg - best.0) >= 0.21;
        if grown && past && crate::specfun::ei_arg_rate(lambda, t)? * sign > 0.0 {
            let (value, t_best) = refine_extremum(lambda, &e0, &profile, best.2, sign)?;
            return Ok(Extremum { value, t: t_best, profile });
        }
        if t > t_cap {
            break;
        }
    }
    Err(Error::Inconclusive(format!(
        "weight search for λ = {lambda} does not stabilize by t = {t}; last lifted arg {arg}, extremum {} at t = {}",
        best.0, best.1
    )))
}

/// Golden-section refinement of the sampled extremum between its neighbours.
fn refine_extremum(
    lambda: Complex64,
    e0: &Scaled,
    profile: &[(f64, f64)],
    i: usize,
    sign: f64,
) -> Result<(f64, f64)> {
    let (ti, ai) = profile[i];
    if i == 0 {
        return Ok((ai, ti));
    }
    let anchor = delta_ei(lambda, e0, ti)?;
    let lifted = |t: f64| -> Result<f64> { Ok(ai + arg_step(&delta_ei(lambda, e0, t)?, &anchor)) };
    let mut lo = profile[i - 1].0;
    let mut hi = profile.get(i + 1).map_or(ti, |p| p.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = sign * lifted(x1)?;
    let mut f2 = sign * lifted(x2)?;
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sign * lifted(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sign * lifted(x2)?;
        }
    }
    let (tb, fb) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if sign * ai <= fb {
        Ok((ai, ti))
    } else {
        Ok((sign * fb, tb))
    }
}

/// Immutable path evaluator with the initial phase lifts and region.
#[derive(Clone, Debug)]
pub struct PathEvaluator {
    cfg: PathConfig,
    charge: PathCharge,
    start_region: RegionLabel,
}

/// Checks the family window and builds the evaluator.
pub fn build_path(cfg: PathConfig) -> Result<PathEvaluator> {
    let lambda = cfg.lambda;
    if !(lambda.re.is_finite() && lambda.im.is_finite()) || lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} is zero or not finite")));
    }
    crate::chambers::classify_glued(lambda, 0)?;
    if !(cfg.t0 > 0.0) {
        return Err(Error::Domain(format!("T₀ = {} must be positive", cfg.t0)));
    }
    if !cfg.s.is_finite() {
        return Err(Error::Window(format!("s = {} is not finite", cfg.s)));
    }
    let subtract = cfg.family() != PathFamily::IntroG;
    let start_region = match &cfg.start {
        StartData::StartInBoundary { b, .. } => {
            let bc = b.dot_c();
            let (lo, hi) = (-1.5 - bc, -0.5 - bc);
            if !(cfg.s > lo && cfg.s < hi) {
                return Err(Error::Window(format!("s = {} is outside ({lo}, {hi})", cfg.s)));
            }
            let k = ck_window(b)?;
            RegionLabel {
                tag: RegionTag::CkBoundary(k),
                evidence: vec![Evidence::new("B·C", bc, true), Evidence::new("s", cfg.s, true)],
            }
        }
        StartData::StartInW2 { r0, s_max, .. } => {
            if !(cfg.s > -r0 && cfg.s <= *s_max) {
                return Err(Error::Window(format!("s = {} is outside (−{r0}, {s_max}]", cfg.s)));
            }
            RegionLabel {
                tag: RegionTag::Wall(Wall::W2),
                evidence: vec![Evidence::new("φ(O_C)", 2.0, true), Evidence::new("Z(O_C)", r0 + cfg.s, true)],
            }
        }
        StartData::IntroG { .. } => RegionLabel { tag: RegionTag::Unknown, evidence: Vec::new() },
    };
    let charge = PathCharge::new(&cfg.model, cfg.z0.clone(), cfg.s, lambda, cfg.t0, cfg.weight, subtract)?;
    Ok(PathEvaluator { cfg, charge, start_region })
}

impl PathEvaluator {
    pub fn config(&self) -> &PathConfig {
        &self.cfg
    }

    pub fn charge(&self) -> &PathCharge {
        &self.charge
    }

    pub fn model(&self) -> &SurfaceModel {
        &self.cfg.model
    }

    pub fn lambda(&self) -> Complex64 {
        self.cfg.lambda
    }

    pub fn t0(&self) -> f64 {
        self.cfg.t0
    }

    pub fn start_region(&self) -> &RegionLabel {
        &self.start_region
    }

    pub fn snapshot(&self, t: f64) -> Result<CentralCharge> {
        self.charge.snapshot(t)
    }

    pub fn eval(&self, obj: &CatalogObject, t: f64) -> Result<Complex64> {
        self.charge.eval(&chern_of(&self.cfg.model, obj), t)
    }

    pub fn eval_class(&self, v: &ChernClass, t: f64) -> Result<Complex64> {
        self.charge.eval(v, t)
    }

    /// Phase (in units of π) of an unshifted object at `T₀`.
    ///
    /// Principal values in `(−1, 1]`, except `O_C` on paths from `W₂`, which starts at 2.
    pub fn initial_phase(&self, base: &BaseObject) -> Result<f64> {
        let obj = CatalogObject::new(base.clone(), 0);
        let z = self.charge.eval_scaled(&chern_of(&self.cfg.model, &obj), self.cfg.t0)?;
        if z.is_zero() {
            return Err(Error::Degenerate(format!("Z_T₀({obj}) = 0")));
        }
        let p = z.arg() / PI;
        let w2_oc = matches!(self.cfg.start, StartData::StartInW2 { .. }) && *base == BaseObject::Curve(0);
        Ok(if w2_oc { p + 2.0 } else { p })
    }

    /// Region of a snapshot from tracked phases of `O_C` and `O_C(−1)`.
    pub fn region_at(&self, phi_oc: f64, ln_oc: f64, phi_ocm1: f64, ln_ocm1: f64) -> RegionLabel {
        let mut label = match classify_snapshot(phi_oc, ln_oc, phi_ocm1, ln_ocm1) {
            Ok(l) => l,
            Err(e) => RegionLabel { tag: RegionTag::Unknown, evidence: vec![Evidence::new(e.to_string(), 0.0, false)] },
        };
        if label.tag == RegionTag::GluedR(-1) && (phi_oc - 2.0).abs() < 1e-9 {
            label.tag = RegionTag::Wall(Wall::W2);
        }
        label
    }
}

#[cfg(test)]
mod tests;
