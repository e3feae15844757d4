//! Region labels for charge snapshots over a fixed normalized `Y`-charge,
//! walls, `(C_k)` windows, the Le Potier test and the sector constant.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Divisor;

/// Tolerance for deciding that `Im λ` sits on `±π`.
pub const WALL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wall {
    W0,
    Wm1,
    W2,
}

/// `GluedR(k)` is the gluing region of the recollement `R_{k+1}` and
/// `GluedL(k)` that of `L_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", content = "k")]
pub enum RegionTag {
    Geometric,
    GluedR(i64),
    GluedL(i64),
    CkBoundary(i64),
    Wall(Wall),
    Unknown,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionTag::Geometric => write!(f, "U(X)"),
            RegionTag::GluedR(k) => write!(f, "U(R_{})", k + 1),
            RegionTag::GluedL(k) => write!(f, "U(L_{k})"),
            RegionTag::CkBoundary(k) => write!(f, "C_{k}"),
            RegionTag::Wall(w) => write!(f, "{w:?}"),
            RegionTag::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub check: String,
    pub value: f64,
    pub holds: bool,
}

impl Evidence {
    pub fn new(check: impl Into<String>, value: f64, holds: bool) -> Self {
        Self { check: check.into(), value, holds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub tag: RegionTag,
    pub evidence: Vec<Evidence>,
}

/// Region of the glued charge with `τ_λ` on `O_C(k+1)`.
///
/// On `Im λ = π` the object `O_C(k)[1]` has charge `−1 − e^λ`, which is
/// negative real (phase 1, wall `W₀`) when `Re λ < 0` and positive real
/// (phase 0, wall `W₋₁`) when `Re λ > 0`. Points of `iπ(2ℤ+1)` make that
/// charge vanish and are rejected.
pub fn classify_glued(lambda: Complex64, k: i64) -> Result<RegionLabel> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Domain(format!("λ = {lambda} is not finite")));
    }
    let odd = ((lambda.im / PI - 1.0) / 2.0).round() * 2.0 + 1.0;
    if lambda.re == 0.0 && (lambda.im - odd * PI).abs() <= WALL_TOL {
        return Err(Error::Degenerate(format!("λ = {lambda}: Z(O_C({k})[1]) = −1 − e^λ vanishes")));
    }
    let im = lambda.im;
    let z_shift = -1.0 - lambda.exp();
    let mut ev = vec![
        Evidence::new("Im λ − π", im - PI, im > PI + WALL_TOL),
        Evidence::new("Im λ + π", im + PI, im <= -PI + WALL_TOL),
    ];
    let tag = if (im - PI).abs() <= WALL_TOL {
        ev.push(Evidence::new("Re Z(O_C(k)[1])", z_shift.re, z_shift.re < 0.0));
        if lambda.re < 0.0 {
            RegionTag::Wall(Wall::W0)
        } else {
            RegionTag::Wall(Wall::Wm1)
        }
    } else if im > PI {
        RegionTag::GluedR(k)
    } else if im <= -PI + WALL_TOL {
        RegionTag::GluedL(k)
    } else {
        RegionTag::Unknown
    };
    Ok(RegionLabel { tag, evidence: ev })
}

/// The `k` with `k − 1/2 < B·C < k + 1/2`.
pub fn ck_window(b: &Divisor) -> Result<i64> {
    let x = b.dot_c();
    if !x.is_finite() {
        return Err(Error::Domain(format!("B·C = {x}")));
    }
    let k = x.round();
    if ((x - k).abs() - 0.5).abs() <= 1e-12 {
        return Err(Error::Window(format!("B·C = {x} lies on ℤ + 1/2")));
    }
    Ok(k as i64)
}

/// Bound `Φ(x)` on `ch₂`-slopes of stable sheaves.
#[derive(Clone)]
pub enum LePotierModel {
    /// `Φ(x) = x²/2`.
    ConservativeDefault,
    UserSupplied(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Default for LePotierModel {
    fn default() -> Self {
        LePotierModel::ConservativeDefault
    }
}

impl fmt::Debug for LePotierModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LePotierModel::ConservativeDefault => write!(f, "ConservativeDefault"),
            LePotierModel::UserSupplied(_) => write!(f, "UserSupplied"),
        }
    }
}

impl LePotierModel {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LePotierModel::ConservativeDefault => 0.5 * x * x,
            LePotierModel::UserSupplied(f) => f(x),
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            LePotierModel::ConservativeDefault => "conservative-default",
            LePotierModel::UserSupplied(_) => "user-supplied",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricVerdict {
    pub geometric: bool,
    pub phi: f64,
    pub provenance: &'static str,
}

/// `Φ(α) > β`.
pub fn geometric_test(alpha: f64, beta: f64, lp: &LePotierModel) -> GeometricVerdict {
    let phi = lp.eval(alpha);
    GeometricVerdict { geometric: phi > beta, phi, provenance: lp.provenance() }
}

/// Which sign change of `Im Z_t` to look for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingTarget {
    Any,
    /// `Im Z` goes from positive to non-positive.
    FromAbove,
    /// `Im Z` goes from negative to non-negative.
    FromBelow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallCrossing {
    pub t: f64,
    pub bracket: (f64, f64),
    pub im_at_t: f64,
    pub abs_at_t: f64,
    pub direction: CrossingTarget,
}

fn matches(target: CrossingTarget, a: f64, b: f64) -> Option<CrossingTarget> {
    let above = a > 0.0 && b <= 0.0;
    let below = a < 0.0 && b >= 0.0;
    match target {
        CrossingTarget::Any if above => Some(CrossingTarget::FromAbove),
        CrossingTarget::Any if below => Some(CrossingTarget::FromBelow),
        CrossingTarget::FromAbove if above => Some(CrossingTarget::FromAbove),
        CrossingTarget::FromBelow if below => Some(CrossingTarget::FromBelow),
        _ => None,
    }
}

/// First sign change of `Im Z_t` on the scan grid, refined by bisection.
///
/// The scan grid must be fine enough that no pair of sign changes falls in
/// one cell; callers pass grids derived from the phase rate of the path.
pub fn find_wall_crossing<F>(eval: F, grid: &[f64], target: CrossingTarget) -> Result<WallCrossing>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if grid.len() < 2 {
        return Err(Error::NoSignChange("scan grid has fewer than two points".into()));
    }
    let mut prev_t = grid[0];
    let mut prev = eval(prev_t)?.im;
    for &t in &grid[1..] {
        let cur = eval(t)?.im;
        if let Some(dir) = matches(target, prev, cur) {
            return bisect(&eval, prev_t, t, prev, dir);
        }
        prev_t = t;
        prev = cur;
    }
    Err(Error::NoSignChange(format!(
        "Im Z keeps its sign on [{}, {}]",
        grid[0],
        grid[grid.len() - 1]
    )))
}

fn bisect<F>(eval: &F, mut lo: f64, mut hi: f64, f_lo: f64, dir: CrossingTarget) -> Result<WallCrossing>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let bracket = (lo, hi);
    let sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-15 * hi.abs() {
            break;
        }
        let v = eval(mid)?.im;
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z_lo = eval(lo)?;
    let z_hi = eval(hi)?;
    let (t, z) = if z_lo.im.abs() <= z_hi.im.abs() { (lo, z_lo) } else { (hi, z_hi) };
    Ok(WallCrossing { t, bracket, im_at_t: z.im, abs_at_t: z.norm(), direction: dir })
}

/// Infimum of `|Σ zᵢ|/Σ|zᵢ|` over tuples in the sector of phases `[θ, 1]`:
/// the two extreme rays with equal weights give `cos(π(1−θ)/2)`.
pub fn sector_constant(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("θ = {theta} is outside (0, 1]")));
    }
    Ok((PI * (1.0 - theta) / 2.0).cos())
}

/// Snapshot region from the tracked phases of `O_C` and `O_C(−1)`.
///
/// `φ(O_C) > 1` places the snapshot in `U(R₀)` through `λ_t = log|Z(O_C)| + iπφ(O_C)`;
/// `φ(O_C(−1)) ≤ −1` places it in `U(L₋₁)` through the analogous `ν_t`.
/// Moduli enter as logarithms so that large charges do not overflow.
pub fn classify_snapshot(phi_oc: f64, ln_abs_oc: f64, phi_ocm1: f64, ln_abs_ocm1: f64) -> Result<RegionLabel> {
    let lam = Complex64::new(ln_abs_oc, PI * phi_oc);
    let r = classify_glued(lam, -1)?;
    if let RegionTag::GluedR(_) = r.tag {
        return Ok(r);
    }
    let nu = Complex64::new(ln_abs_ocm1, PI * phi_ocm1);
    let l = classify_glued(nu, -1)?;
    let mut evidence = r.evidence;
    evidence.extend(l.evidence);
    let tag = match l.tag {
        RegionTag::GluedL(_) => RegionTag::GluedL(-1),
        _ => RegionTag::Unknown,
    };
    Ok(RegionLabel { tag, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glued_examples() {
        assert_eq!(classify_glued(Complex64::new(2.0, 4.0), 0).unwrap().tag, RegionTag::GluedR(0));
        assert_eq!(classify_glued(Complex64::new(-0.7, PI), 0).unwrap().tag, RegionTag::Wall(Wall::W0));
        assert_eq!(classify_glued(Complex64::new(0.7, PI), 3).unwrap().tag, RegionTag::Wall(Wall::Wm1));
        assert_eq!(classify_glued(Complex64::new(0.0, -PI - 0.1), 0).unwrap().tag, RegionTag::GluedL(0));
        assert_eq!(classify_glued(Complex64::new(1.0, 0.5), 0).unwrap().tag, RegionTag::Unknown);
        assert!(matches!(classify_glued(Complex64::new(0.0, PI), 0), Err(Error::Degenerate(_))));
        assert!(matches!(classify_glued(Complex64::new(0.0, -3.0 * PI), 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn window_examples() {
        assert_eq!(ck_window(&Divisor::new(vec![0.0], 1.0)).unwrap(), -1);
        assert_eq!(ck_window(&Divisor::new(vec![0.0], -0.4)).unwrap(), 0);
        assert!(ck_window(&Divisor::new(vec![0.0], -0.5)).is_err());
    }

    #[test]
    fn le_potier_examples() {
        let lp = LePotierModel::default();
        assert!(geometric_test(0.0, -1.0, &lp).geometric);
        assert!(!geometric_test(2.0, 2.0, &lp).geometric);
        assert!(geometric_test(2.0, 1.9, &lp).geometric);
        let user = LePotierModel::UserSupplied(Arc::new(|x| x));
        assert_eq!(geometric_test(1.0, 0.5, &user).provenance, "user-supplied");
    }

    #[test]
    fn linear_root() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let w = find_wall_crossing(|t| Ok(Complex64::new(1.0, t - 7.0)), &grid, CrossingTarget::Any).unwrap();
        assert!((w.t - 7.0).abs() < 1e-12);
        assert!(find_wall_crossing(|t| Ok(Complex64::new(1.0, t + 1.0)), &grid, CrossingTarget::Any).is_err());
    }

    #[test]
    fn sector_examples() {
        assert!((sector_constant(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((sector_constant(0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((sector_constant(0.9).unwrap() - 0.987_688_340_595_137_7).abs() < 1e-12);
        assert!(sector_constant(0.0).is_err());
        assert!(sector_constant(1.5).is_err());
    }
}
