//! Backward extension of boundary paths into the geometric chamber, and wall
//! crossings along a path.

use std::f64::consts::PI;

use serde::Serialize;

use super::{arg_step, PathEvaluator, StartData};
use crate::chambers::{ck_window, find_wall_crossing, CrossingTarget, WallCrossing};
use crate::error::{Error, Result};
use crate::lattice::{chern_of, CatalogObject};

const PROBES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricExtension {
    pub eps_requested: f64,
    /// Certified `ε`; 0 for the empty extension.
    pub eps: f64,
    pub halvings: u32,
    /// `d/dt Im Z_t(O_C(−1))` at `T₀`, negative when the charge leaves `ℍ` forwards.
    pub slope_at_t0: f64,
    pub times: Vec<f64>,
    pub im_values: Vec<f64>,
}

/// Certifies `Im Z_t(O_C(−1)) > 0` on `[T₀ − ε, T₀)`, halving `ε` down to
/// `10⁻⁹·T₀` until it holds.
pub fn extend_into_geometric(ev: &PathEvaluator, eps: f64) -> Result<GeometricExtension> {
    let StartData::StartInBoundary { b, .. } = &ev.config().start else {
        return Err(Error::Config("extension needs a start-in-boundary path".into()));
    };
    let k = ck_window(b)?;
    if k != -1 {
        return Err(Error::Config(format!("boundary charge is of (C_{k}) type, not (C_-1)")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("ε = {eps} must be finite and non-negative")));
    }
    let t0 = ev.t0();
    let charge = ev.charge();
    let v = chern_of(ev.model(), &CatalogObject::curve(-1));
    let (a, _) = charge.affine(&v);
    let slope_at_t0 = (charge.weight * a * (charge.lambda * t0).exp() / t0).im;
    let mut out = GeometricExtension {
        eps_requested: eps,
        eps: 0.0,
        halvings: 0,
        slope_at_t0,
        times: Vec::new(),
        im_values: Vec::new(),
    };
    if eps == 0.0 {
        return Ok(out);
    }
    let floor = 1e-9 * t0;
    let mut e = eps;
    while e >= t0 {
        e *= 0.5;
        out.halvings += 1;
    }
    while e >= floor {
        let times: Vec<f64> = (0..PROBES).map(|i| t0 - e * (1.0 - i as f64 / PROBES as f64)).collect();
        let mut ims = Vec::with_capacity(PROBES);
        for &t in &times {
            ims.push(charge.eval_unchecked(&v, t)?.im);
        }
        if slope_at_t0 < 0.0 && ims.iter().all(|x| *x > 0.0) {
            out.eps = e;
            out.times = times;
            out.im_values = ims;
            return Ok(out);
        }
        e *= 0.5;
        out.halvings += 1;
    }
    Err(Error::Inconclusive(format!(
        "Im Z_t(O_C(−1)) > 0 fails below T₀ = {t0} down to ε = {floor:e} (slope at T₀ {slope_at_t0})"
    )))
}

/// First crossing of `Im Z_t(obj) = 0` in `(T₀, t_end]` of the requested kind.
///
/// The scan grid keeps the tangent turn of `D(t)` below `π/8` and the phase
/// increment of `Z_t(obj)` below `π/8` per cell.
pub fn path_wall_crossing(
    ev: &PathEvaluator,
    obj: &CatalogObject,
    t_end: f64,
    target: CrossingTarget,
) -> Result<WallCrossing> {
    let t0 = ev.t0();
    if !(t_end > t0) {
        return Err(Error::Domain(format!("t_end = {t_end} must exceed T₀ = {t0}")));
    }
    let charge = ev.charge();
    let v = chern_of(ev.model(), obj);
    let lambda = charge.lambda;
    let turn = if lambda.im == 0.0 { f64::INFINITY } else { (PI / 8.0) / lambda.im.abs() };
    let mut grid = vec![t0];
    let mut t = t0;
    let mut z = charge.eval_scaled(&v, t)?;
    while t < t_end {
        let mut h = (t_end - t).min(turn).min(0.25 * t);
        loop {
            let tn = (t + h).min(t_end);
            let zn = charge.eval_scaled(&v, tn)?;
            if arg_step(&zn, &z).abs() < PI / 8.0 || z.is_zero() || h * 0.5 < 1e-13 * t {
                t = tn;
                z = zn;
                break;
            }
            h *= 0.5;
        }
        grid.push(t);
        if grid.len() > 10_000_000 {
            return Err(Error::Integration("scan grid exceeds 10⁷ points".into()));
        }
    }
    find_wall_crossing(|t| charge.eval(&v, t), &grid, target)
}
