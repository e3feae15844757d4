//! Phases, masses and `ℓ_t` of catalog objects from declared HN factors, the
//! relations `≺`, `∼ⁱ`, `∼`, and the decomposition read off a report.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::assumptions::{check_assumptions_on, monotone_cert, normalized, AssumptionReport, MonotoneCert};
use super::fit::{linear_fit, LinearFit};
use super::sample::{sample_path, PathSamples, SampleOptions};
use super::{PathEvaluator, PathFamily};
use crate::chambers::RegionTag;
use crate::error::{Error, Result};
use crate::lattice::{declared_hn, BaseObject, CatalogObject, Gluing, HnFactor};
use crate::sod::{recollement_of, RecollementLabel, SodLabel};

/// Description of the HN model written into every report.
pub const HN_MODEL: &str = "declared HN factors: pieces of the semiorthogonal projection triangle \
     of the final gluing region; pullbacks and skyscrapers off C are taken as stable";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcOptions {
    pub sample: SampleOptions,
    /// Tail bound on `φ⁺ − φ⁻` for limit-semistability.
    pub lss_tol: f64,
    /// Smallest consecutive factor gap accepted for a filtered object.
    pub filtered_gap: f64,
    /// Largest tail range of a bounded phase gap.
    pub bounded_range: f64,
    /// Smallest final phase gap accepted as diverging.
    pub divergence_gap: f64,
    /// Tail bound on `ℓ_t(E/F) − ℓ_H(E/F)` for `∼`.
    pub sim_tol: f64,
}

impl Default for QcOptions {
    fn default() -> Self {
        Self {
            sample: SampleOptions::default(),
            lss_tol: 1e-6,
            filtered_gap: 0.5,
            bounded_range: 0.5,
            divergence_gap: 5.0,
            sim_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectVerdict {
    pub object: CatalogObject,
    pub factors: Vec<HnFactor>,
    pub phi: f64,
    pub log_m: f64,
    /// `sup (φ⁺ − φ⁻)` over the last decade.
    pub spread_tail: f64,
    pub lss: bool,
    /// Smallest consecutive factor gap over the last decade.
    pub factor_gap: Option<f64>,
    pub filtered: bool,
    /// `ℓ_H/(1+|ℓ_H|)`.
    pub normalized_limit: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    /// Row object `≺` column object.
    Precedes,
    /// Column object `≺` row object.
    Follows,
    Equivalent,
    Incomparable,
    /// One of the objects is not limit-semistable.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub sim: bool,
    pub sim_i: bool,
    /// `φ_H(F) − φ_H(E)`.
    pub gap: f64,
    pub gap_range: f64,
    pub gap_fit: LinearFit,
    /// `sup |ℓ_t(E/F) − ℓ_H(E/F)|` over the last decade.
    pub ell_tail: f64,
    /// Same for `ℓ/(1+|ℓ|)`.
    pub normalized_tail: f64,
    pub ell_limit: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItineraryEntry {
    pub t: f64,
    pub region: RegionTag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QcReport {
    pub family: PathFamily,
    pub lambda: Complex64,
    pub s: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub weight: Complex64,
    pub horizon: f64,
    pub samples: usize,
    pub steps: usize,
    pub analytic_from: Option<f64>,
    pub hn_model: &'static str,
    pub itinerary: Vec<ItineraryEntry>,
    pub final_region: Option<RegionTag>,
    pub gluing: Option<Gluing>,
    pub assumptions: AssumptionReport,
    pub monotone: Vec<MonotoneCert>,
    pub objects: Vec<ObjectVerdict>,
    /// `relations[i][j]` relates `objects[i]` to `objects[j]`.
    pub relations: Vec<Vec<Relation>>,
    pub all_lss_or_filtered: bool,
    pub all_lss: bool,
    /// Largest normalized `ℓ(E/F)` tail over limit-semistable pairs.
    pub max_normalized_tail: f64,
    pub equivalences_agree: bool,
    pub violations: Vec<String>,
    /// `ℓ_H(O_C(−1))/(1+|ℓ_H|)` and its distance from `λ/|λ|`.
    pub oc_m1_limit: Option<Complex64>,
    pub oc_m1_limit_error: Option<f64>,
    /// `k` of the decompositions the path can induce.
    pub anchor: i64,
    pub conclusive: bool,
    pub reasons: Vec<String>,
    pub sod: Option<SodLabel>,
    pub sod_rendered: String,
}

/// Base objects needed for a catalog: its own bases and all declared factors.
pub fn tracked_bases(catalog: &[CatalogObject]) -> Vec<BaseObject> {
    let mut out = vec![BaseObject::Curve(-1), BaseObject::Curve(0)];
    let mut push = |b: &BaseObject| {
        if !out.contains(b) {
            out.push(b.clone());
        }
    };
    for obj in catalog {
        push(&obj.base);
        for g in [Gluing::R(0), Gluing::L(-1)] {
            if let Ok(fs) = declared_hn(obj, g) {
                for f in fs {
                    push(&f.object.base);
                }
            }
        }
    }
    out
}

/// Region tag of every sample.
pub fn regions(ev: &PathEvaluator, s: &PathSamples) -> Result<Vec<RegionTag>> {
    let m1 = s.index(&BaseObject::Curve(-1)).ok_or_else(|| Error::Config("O_C(−1) is not tracked".into()))?;
    let m0 = s.index(&BaseObject::Curve(0)).ok_or_else(|| Error::Config("O_C is not tracked".into()))?;
    Ok((0..s.t.len())
        .map(|j| {
            if j == 0 {
                ev.start_region().tag
            } else {
                ev.region_at(s.phase[m0][j], s.ln_abs(m0, j), s.phase[m1][j], s.ln_abs(m1, j)).tag
            }
        })
        .collect())
}

fn gluing_of(tag: RegionTag) -> Option<Gluing> {
    match tag {
        RegionTag::GluedR(-1) => Some(Gluing::R(0)),
        RegionTag::GluedL(-1) => Some(Gluing::L(-1)),
        _ => None,
    }
}

/// Mass-weighted phase, log-mass and phase spread of a factor list at sample `j`.
struct Point {
    phi: f64,
    log_m: f64,
    spread: f64,
}

fn point(s: &PathSamples, factors: &[HnFactor], j: usize) -> Point {
    let parts: Vec<(f64, f64)> = factors
        .iter()
        .map(|f| {
            let i = s.index(&f.object.base).expect("factor bases are tracked");
            ((f.multiplicity as f64).ln() + s.ln_abs(i, j), s.phase[i][j] + f.object.shift as f64)
        })
        .collect();
    let top = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = parts.iter().map(|p| (p.0 - top).exp()).sum();
    let log_m = top + total.ln();
    let phi = parts.iter().map(|p| (p.0 - log_m).exp() * p.1).sum();
    let hi = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Point { phi, log_m, spread: hi - lo }
}

/// One CSV row of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub object: String,
    #[serde(rename = "ReZ")]
    pub re_z: f64,
    #[serde(rename = "ImZ")]
    pub im_z: f64,
    pub arg_unwrapped: f64,
    #[serde(rename = "absZ")]
    pub abs_z: f64,
    pub phi: f64,
    pub logm: f64,
    #[serde(rename = "log_absZ")]
    pub log_abs_z: f64,
}

/// Rows for every sample and catalog object; `phi` and `logm` are NaN where
/// the sample's region has no declared HN data.
pub fn trajectory_rows(ev: &PathEvaluator, s: &PathSamples, catalog: &[CatalogObject]) -> Result<Vec<TrajectoryRow>> {
    let tags = regions(ev, s)?;
    let mut rows = Vec::with_capacity(s.t.len() * catalog.len());
    let hn: Vec<[Option<Vec<HnFactor>>; 2]> = catalog
        .iter()
        .map(|o| [declared_hn(o, Gluing::R(0)).ok(), declared_hn(o, Gluing::L(-1)).ok()])
        .collect();
    for (j, &t) in s.t.iter().enumerate() {
        let slot = match gluing_of(tags[j]) {
            Some(Gluing::R(_)) => Some(0),
            Some(Gluing::L(_)) => Some(1),
            None => None,
        };
        for (o, obj) in catalog.iter().enumerate() {
            let i = s.index(&obj.base).ok_or_else(|| Error::Config(format!("{obj} is not tracked")))?;
            let sign = if obj.shift.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let z = s.z[i][j].value() * sign;
            let (phi, logm) = match slot.and_then(|k| hn[o][k].as_ref()) {
                Some(f) => {
                    let p = point(s, f, j);
                    (p.phi, p.log_m)
                }
                None => (f64::NAN, f64::NAN),
            };
            let log_abs = s.ln_abs(i, j);
            rows.push(TrajectoryRow {
                t,
                object: obj.name(),
                re_z: z.re,
                im_z: z.im,
                arg_unwrapped: PI * (s.phase[i][j] + obj.shift as f64),
                abs_z: log_abs.exp(),
                phi,
                logm,
                log_abs_z: log_abs,
            });
        }
    }
    Ok(rows)
}

/// Samples the catalog up to `horizon` and assembles the report.
pub fn quasi_convergence_report(
    ev: &PathEvaluator,
    catalog: &[CatalogObject],
    horizon: f64,
    opts: &QcOptions,
) -> Result<QcReport> {
    let s = sample_path(ev, &tracked_bases(catalog), horizon, &opts.sample)?;
    quasi_convergence_report_on(ev, catalog, &s, opts)
}

struct Series {
    phi: Vec<f64>,
    log_m: Vec<f64>,
}

pub fn quasi_convergence_report_on(
    ev: &PathEvaluator,
    catalog: &[CatalogObject],
    s: &PathSamples,
    opts: &QcOptions,
) -> Result<QcReport> {
    let cfg = ev.config();
    let lambda = ev.lambda();
    let tags = regions(ev, s)?;
    let tail = s.tail_start();
    let last = s.t.len() - 1;
    let mut reasons = Vec::new();

    let mut itinerary: Vec<ItineraryEntry> = Vec::new();
    for (j, tag) in tags.iter().enumerate() {
        if itinerary.last().map_or(true, |e| e.region != *tag) {
            itinerary.push(ItineraryEntry { t: s.t[j], region: *tag });
        }
    }
    let final_tag = tags[last];
    let stable = tags[tail..].iter().all(|t| *t == final_tag);
    let gluing = if stable { gluing_of(final_tag) } else { None };
    if gluing.is_none() {
        reasons.push(format!(
            "not quasi-convergent at this horizon: itinerary does not settle in U(R_0) or U(L_-1) over the last decade (final region {final_tag})"
        ));
    }
    if lambda.im == 0.0 {
        reasons.push("Im λ = 0: no monotone phase".into());
    }

    let assumptions = check_assumptions_on(ev, s)?;
    if !assumptions.all_hold {
        reasons.push("standing assumptions fail".into());
    }
    let monotone: Vec<MonotoneCert> = (0..s.bases.len())
        .filter(|&i| matches!(s.bases[i], BaseObject::Curve(_)))
        .map(|i| monotone_cert(ev, s, i))
        .collect();

    let mut objects = Vec::new();
    let mut series = Vec::new();
    if let Some(g) = gluing {
        for obj in catalog {
            let factors = declared_hn(obj, g)?;
            let pts: Vec<Point> = (0..=last).map(|j| point(s, &factors, j)).collect();
            let spread_tail = pts[tail..].iter().map(|p| p.spread).fold(0.0, f64::max);
            let lss = spread_tail < opts.lss_tol;
            let factor_gap = if lss {
                None
            } else {
                let mut order: Vec<(f64, usize)> = factors
                    .iter()
                    .enumerate()
                    .map(|(k, f)| (s.object_phase(&f.object, last).unwrap_or(f64::NAN), k))
                    .collect();
                order.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut gap = f64::INFINITY;
                for j in tail..=last {
                    for w in order.windows(2) {
                        let hi = s.object_phase(&factors[w[0].1].object, j).unwrap_or(f64::NAN);
                        let lo = s.object_phase(&factors[w[1].1].object, j).unwrap_or(f64::NAN);
                        gap = gap.min(hi - lo);
                    }
                }
                Some(gap)
            };
            let filtered = factor_gap.is_some_and(|g| g > opts.filtered_gap);
            let p = &pts[last];
            objects.push(ObjectVerdict {
                object: obj.clone(),
                factors,
                phi: p.phi,
                log_m: p.log_m,
                spread_tail,
                lss,
                factor_gap,
                filtered,
                normalized_limit: normalized(Complex64::new(p.log_m, PI * p.phi)),
            });
            series.push(Series {
                phi: pts.iter().map(|p| p.phi).collect(),
                log_m: pts.iter().map(|p| p.log_m).collect(),
            });
        }
    }

    let asym_ok = assumptions.monotone_cert.asymptotic_ok;
    let target = lambda.im.abs() / PI;
    let tail_t = &s.t[tail..];
    let n = objects.len();
    let mut relations = Vec::with_capacity(n);
    let mut violations = Vec::new();
    let mut max_normalized_tail: f64 = 0.0;
    let mut incomparable = 0usize;
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            let (e, f) = (&series[a], &series[b]);
            let gap: Vec<f64> = (tail..=last).map(|j| f.phi[j] - e.phi[j]).collect();
            let gap_h = gap[gap.len() - 1];
            let gap_range = gap.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - gap.iter().cloned().fold(f64::INFINITY, f64::min);
            let gap_fit = linear_fit(tail_t, &gap);
            let ell = |j: usize| Complex64::new(e.log_m[j] - f.log_m[j], PI * (e.phi[j] - f.phi[j]));
            let ell_h = ell(last);
            let (mut ell_tail, mut normalized_tail) = (0.0f64, 0.0f64);
            for j in tail..=last {
                ell_tail = ell_tail.max((ell(j) - ell_h).norm());
                normalized_tail = normalized_tail.max((normalized(ell(j)) - normalized(ell_h)).norm());
            }
            let sim = ell_tail < opts.sim_tol;
            let sim_i = gap_range < opts.bounded_range;
            let diverging = |sign: f64| {
                gap_fit.r2 > 0.999
                    && sign * gap_fit.slope > 0.0
                    && sign * gap_h > opts.divergence_gap
                    && (gap_fit.slope.abs() - target).abs() <= 0.05 * target
                    && asym_ok
            };
            let both = objects[a].lss && objects[b].lss;
            let kind = if !both {
                RelationKind::NotApplicable
            } else if diverging(1.0) {
                RelationKind::Precedes
            } else if diverging(-1.0) {
                RelationKind::Follows
            } else if sim && sim_i {
                RelationKind::Equivalent
            } else {
                RelationKind::Incomparable
            };
            if both {
                max_normalized_tail = max_normalized_tail.max(normalized_tail);
                if sim != sim_i {
                    violations.push(format!(
                        "{} vs {}: ∼ is {sim} but ∼ⁱ is {sim_i}",
                        objects[a].object, objects[b].object
                    ));
                }
                if kind == RelationKind::Incomparable {
                    incomparable += 1;
                }
            }
            row.push(Relation {
                kind,
                sim,
                sim_i,
                gap: gap_h,
                gap_range,
                gap_fit,
                ell_tail,
                normalized_tail,
                ell_limit: ell_h,
            });
        }
        relations.push(row);
    }

    let all_lss = objects.iter().all(|o| o.lss);
    let all_lss_or_filtered = !objects.is_empty() && objects.iter().all(|o| o.lss || o.filtered);
    let equivalences_agree = violations.is_empty();
    if gluing.is_some() {
        if !all_lss_or_filtered {
            reasons.push("some catalog object is neither limit-semistable nor filtered by such objects".into());
        }
        if !equivalences_agree {
            reasons.push(format!("∼ and ∼ⁱ differ on {} pairs", violations.len()));
        }
        if incomparable > 0 {
            reasons.push(format!("{incomparable} limit-semistable pairs are incomparable"));
        }
    }

    let (oc_m1_limit, oc_m1_limit_error) = match gluing {
        Some(g) => {
            let f = declared_hn(&CatalogObject::curve(-1), g)?;
            let p = point(s, &f, last);
            let n = normalized(Complex64::new(p.log_m, PI * p.phi));
            (Some(n), Some((n - lambda / lambda.norm()).norm()))
        }
        None => (None, None),
    };

    let mut report = QcReport {
        family: cfg.family(),
        lambda,
        s: cfg.s,
        t0: cfg.t0,
        weight: cfg.weight,
        horizon: s.horizon(),
        samples: s.t.len(),
        steps: s.steps,
        analytic_from: s.analytic_from,
        hn_model: HN_MODEL,
        itinerary,
        final_region: stable.then_some(final_tag),
        gluing,
        assumptions,
        monotone,
        objects,
        relations,
        all_lss_or_filtered,
        all_lss,
        max_normalized_tail,
        equivalences_agree,
        violations,
        oc_m1_limit,
        oc_m1_limit_error,
        anchor: -1,
        conclusive: reasons.is_empty(),
        reasons,
        sod: None,
        sod_rendered: "inconclusive".into(),
    };
    if report.conclusive {
        match induced_sod(&report, report.anchor) {
            Ok(sod) => {
                report.sod = Some(sod);
                report.sod_rendered = sod.render();
            }
            Err(e) => {
                report.conclusive = false;
                report.reasons.push(e.to_string());
            }
        }
    }
    Ok(report)
}

/// `⟨O_C(k), D^b(Y)⟩` when `arg Z_t(O_C(k))` decreases to `−∞`, and
/// `⟨D^b(Y), O_C(k+1)⟩` when `arg Z_t(O_C(k+1))` increases to `+∞`.
///
/// Paths here start in `U(R₀)` or on its boundary, so only `k = −1` is anchored.
pub fn induced_sod(report: &QcReport, k: i64) -> Result<SodLabel> {
    if !report.conclusive {
        return Err(Error::Inconclusive(format!("report is not conclusive: {}", report.reasons.join("; "))));
    }
    if k != report.anchor {
        return Err(Error::Inconclusive(format!("path is anchored at k = {}, not k = {k}", report.anchor)));
    }
    let cert = |j: i64| report.monotone.iter().find(|c| c.object == CatalogObject::curve(j));
    let sod = if cert(k).is_some_and(|c| c.decreasing()) {
        SodLabel::exc_left(k)
    } else if cert(k + 1).is_some_and(|c| c.increasing()) {
        SodLabel::exc_right(k + 1)
    } else {
        return Err(Error::Inconclusive("neither monotonicity certificate is present".into()));
    };
    let expected = report.gluing.map(|g| match g {
        Gluing::R(n) => RecollementLabel::R(n),
        Gluing::L(n) => RecollementLabel::L(n),
    });
    if expected != Some(recollement_of(sod)) {
        return Err(Error::Inconclusive(format!(
            "{sod} does not match the final gluing region {:?}",
            report.gluing
        )));
    }
    Ok(sod)
}
