//! Batch front end: JSON run configurations, the experiment runners behind
//! each subcommand, and their CSV/JSON artifacts.
//!
//! Every artifact carries the resolved configuration. Outputs depend only on
//! the configuration and the seed, never on timing or thread count.

pub mod oracle;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chambers::{CrossingTarget, WallCrossing};
use crate::error::Error;
use crate::lattice::{default_catalog, CatalogObject, SurfaceModel};
use crate::paths::{
    build_path, path_wall_crossing, quasi_convergence_report_on, sample_path, tracked_bases, trajectory_rows,
    PathConfig, PathRequest, QcOptions, QcReport, StartData, TrajectoryRow,
};
use crate::qde::{closed_form, integrate_at, log_grid, second_order_residual, t_dxi2, QdeParams, QdeState};
use crate::sod::{mutation_orbit, recollement_of, SodLabel};
use crate::specfun::ei;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("config schema violation: {0}")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("{context}: {source}")]
    Upstream {
        context: String,
        #[source]
        source: Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Schema(_) | CliError::Invalid(_) => 2,
            CliError::Write { .. } | CliError::Upstream { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, code) = match self {
            CliError::Read { .. } => ("read", None),
            CliError::Schema(_) => ("schema", None),
            CliError::Invalid(_) => ("invalid-config", None),
            CliError::Write { .. } => ("write", None),
            CliError::Upstream { source, .. } => ("upstream", Some(source.code())),
        };
        json!({ "error": { "kind": kind, "code": code, "message": self.to_string() } })
    }
}

fn upstream(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
    let context = context.into();
    move |source| CliError::Upstream { context, source }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    QdeCheck,
    Walls,
    SpecfunValidate,
    Mutate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::QdeCheck => "qde-check",
            Command::Walls => "walls",
            Command::SpecfunValidate => "specfun-validate",
            Command::Mutate => "mutate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads for sweeps; 0 lets rayon decide.
    pub jobs: usize,
    /// Seed of the randomized suites (`qde-check`, `specfun-validate`).
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out: PathBuf::from("."), jobs: 0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "SurfaceModel::f1")]
    pub model: SurfaceModel,
    #[serde(default)]
    pub path: Option<PathSection>,
    #[serde(default)]
    pub qde: QdeSection,
    #[serde(default)]
    pub specfun: SpecfunSection,
    #[serde(default)]
    pub mutate: MutateSection,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Path family and the `(s, λ)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    pub start: StartData,
    #[serde(default = "default_s")]
    pub s: Vec<f64>,
    pub lambda: LambdaGrid,
    #[serde(default)]
    pub t0: T0Policy,
    /// Fixed `w`; resolved from the family when absent.
    #[serde(default)]
    pub weight: Option<Complex64>,
    #[serde(default = "default_margin")]
    pub margin_scale: f64,
    #[serde(default)]
    pub horizon: HorizonPolicy,
    #[serde(default)]
    pub tolerances: QcOptions,
    #[serde(default)]
    pub catalog: CatalogSection,
    #[serde(default)]
    pub wall: WallSection,
}

fn default_s() -> Vec<f64> {
    vec![0.0]
}

fn default_margin() -> f64 {
    0.1
}

/// Either explicit `[re, im]` points or the product of two axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Points(Vec<Complex64>),
    Product { re: Vec<f64>, im: Vec<f64> },
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<Complex64> {
        match self {
            LambdaGrid::Points(p) => p.clone(),
            LambdaGrid::Product { re, im } => {
                re.iter().flat_map(|&r| im.iter().map(move |&i| Complex64::new(r, i))).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum T0Word {
    Auto,
}

/// `"auto"` runs the threshold search at `λ`; a number fixes `T₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum T0Policy {
    Named(T0Word),
    Explicit(f64),
}

impl Default for T0Policy {
    fn default() -> Self {
        T0Policy::Named(T0Word::Auto)
    }
}

/// A fixed horizon, or `max(t0_factor·T₀, scale/|λ|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonPolicy {
    Explicit(f64),
    Rule {
        #[serde(default = "default_t0_factor")]
        t0_factor: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

fn default_t0_factor() -> f64 {
    100.0
}

fn default_scale() -> f64 {
    3e5
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy::Rule { t0_factor: default_t0_factor(), scale: default_scale() }
    }
}

impl HorizonPolicy {
    pub fn resolve(&self, t0: f64, lambda: Complex64) -> f64 {
        match *self {
            HorizonPolicy::Explicit(h) => h,
            HorizonPolicy::Rule { t0_factor, scale } => (t0_factor * t0).max(scale / lambda.norm()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogSection {
    /// Range `|k| ≤ bound` of the `O_C(k)`.
    pub bound: i64,
    /// Line bundles `L` whose pullbacks join the catalog.
    pub line_bundles: Vec<Vec<i64>>,
}

impl Default for CatalogSection {
    fn default() -> Self {
        Self { bound: 10, line_bundles: vec![vec![1], vec![-1]] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WallSection {
    /// `k` of the `O_C(k)` whose `Im Z_t` is scanned; sweeps use the first.
    pub curves: Vec<i64>,
    pub target: CrossingTarget,
    /// Scan window `(T₀, t_end_factor·T₀]`.
    pub t_end_factor: f64,
}

impl Default for WallSection {
    fn default() -> Self {
        Self { curves: vec![-1], target: CrossingTarget::FromBelow, t_end_factor: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdeSection {
    pub cases: usize,
    pub tol: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    /// Samples of the dense re-integration used for residuals.
    pub residual_samples: usize,
    /// `C₀` of the general trajectories.
    pub c0: Complex64,
}

impl Default for QdeSection {
    fn default() -> Self {
        Self { cases: 20, tol: 1e-10, t_start: 1.0, t_end: 10.0, samples: 401, residual_samples: 20001, c0: Complex64::new(0.3, 0.1) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecfunSection {
    pub points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub rel_tol: f64,
    /// `|λt|` of the asymptotic-ratio checks.
    pub asymptotic_radii: Vec<f64>,
    /// Directions `arg λ` of the asymptotic-ratio checks.
    pub asymptotic_args: Vec<f64>,
}

impl Default for SpecfunSection {
    fn default() -> Self {
        Self {
            points: 200,
            r_min: 0.1,
            r_max: 50.0,
            rel_tol: 1e-10,
            asymptotic_radii: vec![30.0, 100.0, 300.0],
            asymptotic_args: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutateSection {
    pub start: SodLabel,
    pub depth: usize,
}

impl Default for MutateSection {
    fn default() -> Self {
        Self { start: SodLabel::exc_left(-1), depth: 10 }
    }
}

/// File names inside the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub trajectory: String,
    pub report: String,
    pub sweep_table: String,
    pub sweep_json: String,
    pub walls: String,
    pub qde: String,
    pub specfun: String,
    pub mutate: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trajectory: "trajectory.csv".into(),
            report: "report.json".into(),
            sweep_table: "sweep.csv".into(),
            sweep_json: "sweep.json".into(),
            walls: "walls.json".into(),
            qde: "qde_check.json".into(),
            specfun: "specfun_validate.json".into(),
            mutate: "mutation_orbit.json".into(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Read { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn finite(name: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(CliError::Invalid(format!("{name} contains the non-finite value {x}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.path {
            if p.s.is_empty() {
                return Err(CliError::Invalid("s grid is empty".into()));
            }
            finite("s grid", &p.s)?;
            let lams = p.lambda.points();
            if lams.is_empty() {
                return Err(CliError::Invalid("λ grid is empty".into()));
            }
            let flat: Vec<f64> = lams.iter().flat_map(|l| [l.re, l.im]).collect();
            finite("λ grid", &flat)?;
            if let T0Policy::Explicit(t) = p.t0 {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::Invalid(format!("T₀ = {t} must be positive and finite")));
                }
            }
            match p.horizon {
                HorizonPolicy::Explicit(h) if !(h > 0.0 && h.is_finite()) => {
                    return Err(CliError::Invalid(format!("horizon {h} must be positive and finite")));
                }
                HorizonPolicy::Rule { t0_factor, scale } if !(t0_factor > 1.0 && scale >= 0.0) => {
                    return Err(CliError::Invalid("horizon rule needs t0_factor > 1 and scale ≥ 0".into()));
                }
                _ => {}
            }
            if p.tolerances.sample.samples < 20 {
                return Err(CliError::Invalid("at least 20 samples are needed".into()));
            }
            if p.catalog.bound < 1 {
                return Err(CliError::Invalid("catalog bound must be at least 1".into()));
            }
            if p.catalog.line_bundles.iter().any(|l| l.len() != self.model.rho()) {
                return Err(CliError::Invalid(format!("catalog line bundles need ρ = {} entries", self.model.rho())));
            }
            if !(p.wall.t_end_factor > 1.0) || p.wall.curves.is_empty() {
                return Err(CliError::Invalid("wall scan needs curves and t_end_factor > 1".into()));
            }
        }
        let q = &self.qde;
        if !(q.tol > 0.0 && q.t_start > 0.0 && q.t_end > q.t_start && q.samples >= 5 && q.residual_samples >= 5) {
            return Err(CliError::Invalid("qde section needs tol > 0, 0 < t_start < t_end and ≥ 5 samples".into()));
        }
        let sf = &self.specfun;
        if !(sf.r_min > 0.0 && sf.r_max >= sf.r_min && sf.rel_tol > 0.0) {
            return Err(CliError::Invalid("specfun section needs 0 < r_min ≤ r_max and rel_tol > 0".into()));
        }
        Ok(())
    }

    fn path_section(&self) -> Result<&PathSection, CliError> {
        self.path.as_ref().ok_or_else(|| CliError::Invalid("this subcommand needs a `path` section".into()))
    }

    pub fn catalog(&self) -> Vec<CatalogObject> {
        let c = self.path.as_ref().map(|p| p.catalog.clone()).unwrap_or_default();
        default_catalog(&self.model, c.bound, &c.line_bundles)
    }

    /// Grid cells in output order: `s` outer, `λ` inner.
    pub fn cells(&self) -> Result<Vec<(f64, Complex64)>, CliError> {
        let p = self.path_section()?;
        let lams = p.lambda.points();
        Ok(p.s.iter().flat_map(|&s| lams.iter().map(move |&l| (s, l))).collect())
    }
}

/// Resolved path data of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedCell {
    pub path: PathConfig,
    pub horizon: f64,
}

pub fn resolve_cell(cfg: &RunConfig, s: f64, lambda: Complex64) -> Result<ResolvedCell, CliError> {
    let p = cfg.path_section()?;
    let ctx = format!("cell s = {s}, λ = {lambda}");
    let req = PathRequest {
        start: p.start.clone(),
        s,
        lambda,
        t0: match p.t0 {
            T0Policy::Named(T0Word::Auto) => None,
            T0Policy::Explicit(t) => Some(t),
        },
        weight: p.weight,
        margin_scale: p.margin_scale,
    };
    let path = req.resolve(&cfg.model).map_err(upstream(ctx.clone()))?;
    let horizon = p.horizon.resolve(path.t0, lambda);
    if !(horizon > path.t0) {
        return Err(CliError::Invalid(format!("{ctx}: horizon {horizon} does not exceed T₀ = {}", path.t0)));
    }
    Ok(ResolvedCell { path, horizon })
}

/// Everything `simulate` produces for one cell.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub cell: ResolvedCell,
    pub rows: Vec<TrajectoryRow>,
    pub report: QcReport,
}

pub fn simulate_cell(cfg: &RunConfig, s: f64, lambda: Complex64) -> Result<Simulation, CliError> {
    let p = cfg.path_section()?;
    let cell = resolve_cell(cfg, s, lambda)?;
    let ctx = format!("cell s = {s}, λ = {lambda}");
    let ev = build_path(cell.path.clone()).map_err(upstream(ctx.clone()))?;
    let catalog = cfg.catalog();
    let samples =
        sample_path(&ev, &tracked_bases(&catalog), cell.horizon, &p.tolerances.sample).map_err(upstream(ctx.clone()))?;
    let rows = trajectory_rows(&ev, &samples, &catalog).map_err(upstream(ctx.clone()))?;
    let report = quasi_convergence_report_on(&ev, &catalog, &samples, &p.tolerances).map_err(upstream(ctx))?;
    Ok(Simulation { cell, rows, report })
}

/// One line of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub s: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub weight_re: Option<f64>,
    pub weight_im: Option<f64>,
    pub final_region: Option<String>,
    pub conclusive: bool,
    pub sod: Option<String>,
    pub wall_object: String,
    pub wall_t1: Option<f64>,
    pub all_lss: Option<bool>,
    pub all_lss_or_filtered: Option<bool>,
    pub max_normalized_tail: Option<f64>,
    pub equivalences_agree: Option<bool>,
    pub oc_m1_limit_error: Option<f64>,
    pub note: Option<String>,
}

fn wall_for(cfg: &RunConfig, cell: &ResolvedCell, k: i64) -> Result<WallCrossing, CliError> {
    let p = cfg.path_section()?;
    let ev = build_path(cell.path.clone()).map_err(upstream("wall scan"))?;
    let t_end = p.wall.t_end_factor * cell.path.t0;
    path_wall_crossing(&ev, &CatalogObject::curve(k), t_end, p.wall.target)
        .map_err(upstream(format!("wall of {} on (T₀, {t_end}]", CatalogObject::curve(k))))
}

pub fn sweep_row(cfg: &RunConfig, index: usize, s: f64, lambda: Complex64) -> SweepRow {
    let wall_k = cfg.path.as_ref().map_or(-1, |p| p.wall.curves[0]);
    let mut row = SweepRow {
        index,
        s,
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        t0: None,
        horizon: None,
        weight_re: None,
        weight_im: None,
        final_region: None,
        conclusive: false,
        sod: None,
        wall_object: CatalogObject::curve(wall_k).name(),
        wall_t1: None,
        all_lss: None,
        all_lss_or_filtered: None,
        max_normalized_tail: None,
        equivalences_agree: None,
        oc_m1_limit_error: None,
        note: None,
    };
    let sim = match simulate_cell(cfg, s, lambda) {
        Ok(sim) => sim,
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    };
    let r = &sim.report;
    row.t0 = Some(sim.cell.path.t0);
    row.horizon = Some(sim.cell.horizon);
    row.weight_re = Some(sim.cell.path.weight.re);
    row.weight_im = Some(sim.cell.path.weight.im);
    row.final_region = r.final_region.map(|t| t.to_string());
    row.conclusive = r.conclusive;
    row.sod = r.sod.map(|x| x.render());
    row.all_lss = Some(r.all_lss);
    row.all_lss_or_filtered = Some(r.all_lss_or_filtered);
    row.max_normalized_tail = Some(r.max_normalized_tail);
    row.equivalences_agree = Some(r.equivalences_agree);
    row.oc_m1_limit_error = r.oc_m1_limit_error;
    let mut notes = r.reasons.clone();
    match wall_for(cfg, &sim.cell, wall_k) {
        Ok(w) => row.wall_t1 = Some(w.t),
        Err(e) => notes.push(e.to_string()),
    }
    if !notes.is_empty() {
        row.note = Some(notes.join("; "));
    }
    row
}

/// Runs every cell, in parallel when `jobs ≠ 1`, and returns rows in grid order.
pub fn sweep_rows(cfg: &RunConfig, jobs: usize) -> Result<Vec<SweepRow>, CliError> {
    let cells = cfg.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        cells.par_iter().enumerate().map(|(i, &(s, l))| sweep_row(cfg, i, s, l)).collect()
    }))
}

/// Uniform draw from `[−2, 2] + i[−2, 2]`.
fn boxed(rng: &mut ChaCha8Rng) -> Complex64 {
    let re = rng.gen_range(-2.0..2.0);
    Complex64::new(re, rng.gen_range(-2.0..2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QdeCase {
    pub a: Complex64,
    pub b: Complex64,
    pub lambda: Complex64,
    pub closed_form_rel_error: f64,
    /// Residuals relative to `sup |tξ₂'|` on the dense re-integration.
    pub closed_form_residual: f64,
    pub general_residual: f64,
    pub closed_form_residual_abs: f64,
    pub general_residual_abs: f64,
    pub a_log_error: f64,
}

/// Absolute and relative second-order residual on a dense re-integration.
fn dense_residual(p: &QdeParams, init: &QdeState, sec: &QdeSection) -> Result<(f64, f64), CliError> {
    let grid = log_grid(sec.t_start, sec.t_end, sec.residual_samples);
    let tr = integrate_at(p, init, sec.t_start, sec.t_end, sec.tol, &grid).map_err(upstream("dense qde"))?;
    let abs = second_order_residual(&tr, p).map_err(upstream("residual"))?;
    let scale = tr.states.iter().map(|s| t_dxi2(s, p).norm()).fold(0.0, f64::max);
    Ok((abs, abs / scale.max(1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QdeCheck {
    pub cases: Vec<QdeCase>,
    pub max_closed_form_rel_error: f64,
    pub max_closed_form_residual: f64,
    pub max_general_residual: f64,
    pub max_a_log_error: f64,
    pub pass: bool,
}

/// Closed-form and general trajectories for random `(a, b, λ)`.
///
/// The closed-form error at each sample is taken relative to
/// `max(|a·Ei(λt) + b|, |a·Ei(λt)|)`, which stays meaningful where the sum
/// passes near 0. Residuals are finite-difference values on a dense re-integration, divided
/// by `max(1, sup |tξ₂'|)` so that they compare with the relative `tol`.
///
/// With `ξ₀ = 0` and `a ≡ 0`, `ξ₂` solves `t ξ₂' = −ν/z`, `ν = ν₀ e^{λ(t−t₀)}`,
/// so `ξ₂ = a·Ei(λt) + b` for `ν₀ = −a·z·e^{λt₀}`. The general runs use
/// `ξ₀ = C₀ ≠ 0`, for which `a(t) = a₁ + (C₀/z) log(t/t₀)`.
pub fn qde_check(model: &SurfaceModel, sec: &QdeSection, seed: u64) -> Result<QdeCheck, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ky2 = crate::lattice::q_to_f64(&model.ky2());
    let grid = log_grid(sec.t_start, sec.t_end, sec.samples);
    let mut cases = Vec::with_capacity(sec.cases);
    for _ in 0..sec.cases {
        let (a, b) = (boxed(&mut rng), boxed(&mut rng));
        let lambda = Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(-PI..PI));
        let z = Complex64::new(1.0 / lambda.norm(), 0.0);
        let q = lambda * z;
        let p = QdeParams::new(z, q, ky2, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            .map_err(upstream("qde parameters"))?;
        let t0 = sec.t_start;
        let init = QdeState {
            xi0: Complex64::new(0.0, 0.0),
            a: Complex64::new(0.0, 0.0),
            d: vec![Complex64::new(0.0, 0.0); model.rho()],
            nu: -a * z * (lambda * t0).exp(),
            xi2: closed_form(a, b, lambda, t0).map_err(upstream("closed form"))?,
        };
        let tr = integrate_at(&p, &init, t0, sec.t_end, sec.tol, &grid).map_err(upstream("qde"))?;
        let mut rel: f64 = 0.0;
        for (t, st) in tr.t.iter().zip(&tr.states) {
            let want = closed_form(a, b, lambda, *t).map_err(upstream("closed form"))?;
            let scale = want.norm().max((want - b).norm());
            rel = rel.max((st.xi2 - want).norm() / scale.max(1e-300));
        }
        let (closed_abs, closed_res) = dense_residual(&p, &init, sec)?;

        let a1 = boxed(&mut rng);
        let gp = QdeParams::new(z, q, ky2, sec.c0, Complex64::new(0.0, 0.0)).map_err(upstream("qde parameters"))?;
        let ginit = QdeState {
            xi0: sec.c0,
            a: a1,
            d: vec![boxed(&mut rng); model.rho()],
            nu: boxed(&mut rng),
            xi2: boxed(&mut rng),
        };
        let gt = integrate_at(&gp, &ginit, t0, sec.t_end, sec.tol, &grid).map_err(upstream("qde"))?;
        let (general_abs, general_res) = dense_residual(&gp, &ginit, sec)?;
        let a_err = gt
            .t
            .iter()
            .zip(&gt.states)
            .map(|(t, st)| (st.a - (a1 + sec.c0 / z * (t / t0).ln())).norm())
            .fold(0.0, f64::max);
        cases.push(QdeCase {
            a,
            b,
            lambda,
            closed_form_rel_error: rel,
            closed_form_residual: closed_res,
            general_residual: general_res,
            closed_form_residual_abs: closed_abs,
            general_residual_abs: general_abs,
            a_log_error: a_err,
        });
    }
    let max = |f: fn(&QdeCase) -> f64| cases.iter().map(f).fold(0.0, f64::max);
    let (m1, m2, m3, m4) = (
        max(|c| c.closed_form_rel_error),
        max(|c| c.closed_form_residual),
        max(|c| c.general_residual),
        max(|c| c.a_log_error),
    );
    Ok(QdeCheck {
        pass: m1 <= 1e-8 && m2 < 1e-6 && m3 < 10.0 * sec.tol && m4 <= 1e-9,
        cases,
        max_closed_form_rel_error: m1,
        max_closed_form_residual: m2,
        max_general_residual: m3,
        max_a_log_error: m4,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EiPoint {
    pub z: Complex64,
    pub ei: Complex64,
    pub reference: Complex64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPoint {
    pub z: Complex64,
    /// `|Ei(z)·z·e^{−z} − 1|`.
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecfunReport {
    pub points: Vec<EiPoint>,
    pub max_rel_error: f64,
    pub asymptotic: Vec<AsymptoticPoint>,
    pub pass: bool,
}

/// `Ei` against the quadrature reference at random points with log-uniform
/// modulus, plus the asymptotic ratio.
pub fn specfun_validate(sec: &SpecfunSection, seed: u64) -> Result<SpecfunReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(sec.points);
    for _ in 0..sec.points {
        let r = (rng.gen_range(sec.r_min.ln()..=sec.r_max.ln())).exp();
        let z = Complex64::from_polar(r, rng.gen_range(-PI..PI));
        let v = ei(z).map_err(upstream(format!("Ei({z})")))?.value;
        let reference = oracle::ei_reference(z);
        points.push(EiPoint { z, ei: v, reference, rel_error: (v - reference).norm() / reference.norm() });
    }
    let mut asymptotic = Vec::new();
    for &r in &sec.asymptotic_radii {
        for &a in &sec.asymptotic_args {
            let z = Complex64::from_polar(r, a);
            let v = ei(z).map_err(upstream(format!("Ei({z})")))?.value;
            let deviation = (v * z * (-z).exp() - 1.0).norm();
            asymptotic.push(AsymptoticPoint { z, deviation, bound: 2.0 / r });
        }
    }
    let max_rel_error = points.iter().map(|p| p.rel_error).fold(0.0, f64::max);
    let pass = max_rel_error <= sec.rel_tol && asymptotic.iter().all(|p| p.deviation <= p.bound);
    Ok(SpecfunReport { points, max_rel_error, asymptotic, pass })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Write { path: path.display().to_string(), message: e.to_string() })
}

fn to_json(v: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Write { path: "<json>".into(), message: e.to_string() })
}

/// CSV with the resolved configuration as a leading `#` comment line.
fn csv_with_header<T: Serialize>(config: &Value, rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# config: {}\n", serde_json::to_string(config).expect("values serialize")).into_bytes();
    let mut wr = csv::Writer::from_writer(&mut out);
    for r in rows {
        wr.serialize(r).map_err(|e| CliError::Write { path: "<csv>".into(), message: e.to_string() })?;
    }
    wr.flush().map_err(|e| CliError::Write { path: "<csv>".into(), message: e.to_string() })?;
    drop(wr);
    Ok(out)
}

/// Runs a subcommand, writes its artifacts under `opts.out` and returns the
/// summary printed on stdout.
pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Value, CliError> {
    fs::create_dir_all(&opts.out)
        .map_err(|e| CliError::Write { path: opts.out.display().to_string(), message: e.to_string() })?;
    let out = |name: &str| opts.out.join(name);
    let config = serde_json::to_value(cfg).expect("config serializes");
    let o = &cfg.outputs;
    match cmd {
        Command::Simulate => {
            let cells = cfg.cells()?;
            let [(s, lambda)] = cells[..] else {
                return Err(CliError::Invalid(format!("simulate needs a single (s, λ) cell, got {}", cells.len())));
            };
            let sim = simulate_cell(cfg, s, lambda)?;
            let header = json!({ "config": config, "resolved": sim.cell });
            write(&out(&o.trajectory), &csv_with_header(&header, &sim.rows)?)?;
            let doc = json!({ "config": config, "resolved": sim.cell, "report": sim.report, "sod": sim.report.sod });
            write(&out(&o.report), to_json(&doc)?.as_bytes())?;
            Ok(json!({
                "command": cmd.name(),
                "conclusive": sim.report.conclusive,
                "sod": sim.report.sod,
                "sod_rendered": sim.report.sod_rendered,
                "reasons": sim.report.reasons,
            }))
        }
        Command::Sweep => {
            let rows = sweep_rows(cfg, opts.jobs)?;
            write(&out(&o.sweep_table), &csv_with_header(&json!({ "config": config }), &rows)?)?;
            write(&out(&o.sweep_json), to_json(&json!({ "config": config, "rows": rows }))?.as_bytes())?;
            let conclusive = rows.iter().filter(|r| r.conclusive).count();
            Ok(json!({ "command": cmd.name(), "cells": rows.len(), "conclusive": conclusive }))
        }
        Command::Walls => {
            let p = cfg.path_section()?;
            let mut cells_out = Vec::new();
            for (s, lambda) in cfg.cells()? {
                let cell = resolve_cell(cfg, s, lambda)?;
                let mut walls = Vec::new();
                for &k in &p.wall.curves {
                    let entry = match wall_for(cfg, &cell, k) {
                        Ok(w) => json!({ "object": CatalogObject::curve(k).name(), "crossing": w }),
                        Err(e) => json!({ "object": CatalogObject::curve(k).name(), "crossing": null, "note": e.to_string() }),
                    };
                    walls.push(entry);
                }
                cells_out.push(json!({ "resolved": cell, "walls": walls }));
            }
            write(&out(&o.walls), to_json(&json!({ "config": config, "cells": cells_out }))?.as_bytes())?;
            Ok(json!({ "command": cmd.name(), "cells": cells_out.len() }))
        }
        Command::QdeCheck => {
            let r = qde_check(&cfg.model, &cfg.qde, opts.seed)?;
            write(&out(&o.qde), to_json(&json!({ "config": config, "seed": opts.seed, "check": r }))?.as_bytes())?;
            Ok(json!({
                "command": cmd.name(),
                "pass": r.pass,
                "max_closed_form_rel_error": r.max_closed_form_rel_error,
                "max_general_residual": r.max_general_residual,
            }))
        }
        Command::SpecfunValidate => {
            let r = specfun_validate(&cfg.specfun, opts.seed)?;
            write(&out(&o.specfun), to_json(&json!({ "config": config, "seed": opts.seed, "report": r }))?.as_bytes())?;
            Ok(json!({ "command": cmd.name(), "pass": r.pass, "max_rel_error": r.max_rel_error }))
        }
        Command::Mutate => {
            let orbit = mutation_orbit(cfg.mutate.start, cfg.mutate.depth);
            let labels: Vec<Value> = orbit
                .iter()
                .map(|l| json!({ "label": l, "rendered": l.render(), "recollement": recollement_of(*l) }))
                .collect();
            write(&out(&o.mutate), to_json(&json!({ "config": config, "orbit": labels }))?.as_bytes())?;
            Ok(json!({ "command": cmd.name(), "size": orbit.len() }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_configs_are_schema_errors() {
        let e = parse_config("{ not json").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse_config(r#"{"bogus": 1}"#).unwrap_err();
        assert!(matches!(e, CliError::Schema(_)));
        assert_eq!(e.to_json()["error"]["kind"], "schema");
    }

    #[test]
    fn grid_invariants() {
        let base = r#"{"path": {"start": {"family": "start-in-w2",
            "y_charge": {"alpha": 0.5, "beta": 0.2, "b": [0.1], "omega": [1.0]}, "r0": 0.7},
            "lambda": {"re": [1, 2], "im": [-0.8, 0.3]}, "horizon": 0.5, "t0": 1.0}}"#;
        let cfg = parse_config(base).unwrap();
        assert_eq!(cfg.cells().unwrap().len(), 4);
        assert_eq!(cfg.cells().unwrap()[1].1, Complex64::new(1.0, 0.3));
        let e = resolve_cell(&cfg, 0.0, Complex64::new(1.0, -0.8)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let empty = base.replace(r#""re": [1, 2]"#, r#""re": []"#);
        assert!(matches!(parse_config(&empty), Err(CliError::Invalid(_))));
    }

    #[test]
    fn horizon_rule() {
        let h = HorizonPolicy::default();
        assert_eq!(h.resolve(2.0, Complex64::new(3e3, 4e3)), 200.0);
        assert_eq!(h.resolve(1.0, Complex64::new(0.0, 1.0)), 3e5);
    }
}
