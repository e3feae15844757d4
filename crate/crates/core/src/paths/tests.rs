use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::lattice::default_catalog;
use crate::sod::SodLabel;
use crate::specfun::ei;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn boundary() -> StartData {
    StartData::StartInBoundary { b: Divisor::new(vec![0.2], 1.0), omega: vec![1.0] }
}

fn w2() -> StartData {
    let y_charge = YCharge { alpha: 0.5, beta: 0.2, b: vec![0.1], omega: vec![1.0] };
    StartData::StartInW2 { y_charge, r0: 0.7, s_max: 10.0 }
}

fn evaluator(start: StartData, s: f64, lambda: Complex64) -> PathEvaluator {
    let cfg = PathRequest::new(start, s, lambda).resolve(&SurfaceModel::f1()).unwrap();
    build_path(cfg).unwrap()
}

#[test]
fn plain_weights() {
    let l = c(1.0, 0.5);
    assert_eq!(resolve_weight(PathFamily::StartInBoundary, l, 1.0, 0.1).unwrap().weight, c(0.5, 0.0));
    assert_eq!(resolve_weight(PathFamily::StartInBoundary, c(1.0, 0.0), 1.0, 0.1).unwrap().weight, c(0.0, 0.0));
    assert_eq!(resolve_weight(PathFamily::IntroG, l, 1.0, 0.1).unwrap().weight, c(1.0, 0.0));
    assert_eq!(resolve_weight(PathFamily::StartInW2, c(0.5, 0.0), 1.0, 0.1).unwrap().weight, c(-1.0, 0.0));
    assert!(resolve_weight(PathFamily::StartInW2, l, 1.0, 1.5).is_err());
}

/// Lifted `arg ΔEi` on a uniform grid fine enough that consecutive
/// increments are tiny, from the principal direction of `Im λ·T₀`.
fn dense_lift(lambda: Complex64, t0: f64, t_end: f64, n: usize) -> Vec<f64> {
    let e0 = ei(lambda * t0).unwrap().value;
    let mut t = t0 * (1.0 + 1e-9);
    let mut prev = ei(lambda * t).unwrap().value - e0;
    let dir = Complex64::from_polar(1.0, lambda.im * t0).arg();
    let mut arg = dir + (prev * Complex64::from_polar(1.0, -dir)).arg();
    let mut out = vec![arg];
    let h = (t_end - t) / n as f64;
    for _ in 0..n {
        t += h;
        let cur = ei(lambda * t).unwrap().value - e0;
        arg += (cur * prev.conj()).arg();
        out.push(arg);
        prev = cur;
    }
    out
}

#[test]
fn w2_weight_matches_dense_extremum() {
    for lambda in [c(1.0, 0.8), c(1.0, -0.8), c(0.5, 0.3), c(2.0, -1.0)] {
        let t0 = find_t0(&LambdaBox::point(lambda), 1.0).unwrap();
        let r = resolve_weight(PathFamily::StartInW2, lambda, t0, 0.1).unwrap();
        let lifts = dense_lift(lambda, t0, t0 + 40.0 / lambda.norm(), 200_000);
        let margin = 0.1 * lambda.im.abs().min(1.0);
        let (ext, target) = if lambda.im > 0.0 {
            (lifts.iter().cloned().fold(f64::INFINITY, f64::min), -PI + margin)
        } else {
            (lifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max), PI - margin)
        };
        let found = r.extremum.unwrap();
        assert!((found - ext).abs() < 1e-6, "{lambda}: extremum {found} vs dense {ext}");
        // arg w + extremum sits on the margin, modulo 2π.
        let off = r.weight.arg() + found - target;
        assert!((off - 2.0 * PI * (off / (2.0 * PI)).round()).abs() < 1e-12, "{lambda}: offset {off}");
    }
}

#[test]
fn family_windows() {
    let m = SurfaceModel::f1();
    let l = c(1.0, 0.5);
    for (s, ok) in [(0.1, true), (-0.49, true), (0.5, false), (-0.5, false), (2.0, false)] {
        let mut req = PathRequest::new(boundary(), s, l);
        req.t0 = Some(2.0);
        let built = build_path(req.resolve(&m).unwrap());
        assert_eq!(built.is_ok(), ok, "boundary s = {s}");
        if !ok {
            assert!(matches!(built.unwrap_err(), Error::Window(_)));
        }
    }
    for (s, ok) in [(0.0, true), (-0.69, true), (-0.7, false), (10.0, true), (10.5, false)] {
        let mut req = PathRequest::new(w2(), s, l);
        req.t0 = Some(2.0);
        assert_eq!(build_path(req.resolve(&m).unwrap()).is_ok(), ok, "W2 s = {s}");
    }
}

#[test]
fn boundary_start_is_twisted_geometric_charge() {
    let m = SurfaceModel::f1();
    for (s, lambda) in [(0.1, c(1.0, 0.5)), (-0.3, c(0.4, -1.2)), (0.0, c(2.0, 0.1))] {
        let ev = evaluator(boundary(), s, lambda);
        let b = Divisor::new(vec![0.2], 1.0).add(&Divisor::exceptional_multiple(1, -s));
        let want = geometric_charge(&m, &b, &Divisor::new(vec![1.0], 0.0)).unwrap();
        for obj in default_catalog(&m, 10, &[vec![1], vec![-1], vec![2]]) {
            let v = chern_of(&m, &obj);
            let (got, exp) = (ev.eval_class(&v, ev.t0()).unwrap(), want.eval(&v));
            assert!((got - exp).norm() <= 1e-12 * exp.norm().max(1.0), "{obj}: {got} vs {exp}");
        }
    }
}

#[test]
fn snapshot_matches_path_charge() {
    let m = SurfaceModel::f1();
    let ev = evaluator(w2(), 0.2, c(1.0, -0.6));
    let cfg = ev.config();
    let fresh = PathCharge::new(&m, cfg.z0.clone(), cfg.s, cfg.lambda, cfg.t0, cfg.weight, true).unwrap();
    for t in [ev.t0(), 2.0 * ev.t0(), 17.5] {
        let snap = ev.snapshot(t).unwrap();
        let other = fresh.snapshot(t).unwrap();
        for obj in default_catalog(&m, 10, &[vec![1]]) {
            let v = chern_of(&m, &obj);
            assert_eq!(snap.eval(&v), other.eval(&v), "{obj} at {t}");
            let direct = ev.eval_class(&v, t).unwrap();
            assert!((snap.eval(&v) - direct).norm() <= 1e-14 * direct.norm().max(1.0), "{obj} at {t}");
        }
    }
}

#[test]
fn real_lambda_boundary_path_is_inconclusive() {
    let m = SurfaceModel::f1();
    let ev = evaluator(boundary(), 0.1, c(1.0, 0.0));
    assert_eq!(ev.config().weight, c(0.0, 0.0));
    let cat = default_catalog(&m, 3, &[]);
    let r = quasi_convergence_report(&ev, &cat, 100.0 * ev.t0(), &QcOptions::default()).unwrap();
    assert!(!r.conclusive);
    assert!(r.sod.is_none());
    assert!(induced_sod(&r, -1).is_err());
}

#[test]
fn shifts_move_phase_by_integers() {
    let m = SurfaceModel::f1();
    let ev = evaluator(w2(), 0.0, c(1.0, -0.5));
    let cat = default_catalog(&m, 10, &[vec![1]]);
    let r = quasi_convergence_report(&ev, &cat, 1e3, &QcOptions::default()).unwrap();
    let find = |o: &CatalogObject| r.objects.iter().find(|v| &v.object == o).unwrap();
    let base = find(&CatalogObject::curve(0));
    for n in [-1, 1] {
        let sh = find(&CatalogObject::curve(0).shifted(n));
        assert_eq!(sh.phi - base.phi, n as f64);
        assert_eq!(sh.log_m, base.log_m);
    }
}

#[test]
fn finer_turns_do_not_move_phases() {
    let ev = evaluator(w2(), 0.0, c(1.0, 0.8));
    let bases = [BaseObject::Curve(-1), BaseObject::Curve(0), BaseObject::Curve(3)];
    let base = SampleOptions { samples: 40, ..SampleOptions::default() };
    let coarse = sample_path(&ev, &bases, 500.0, &base).unwrap();
    let fine = SampleOptions { max_turn: PI / 16.0, ..base };
    let fine = sample_path(&ev, &bases, 500.0, &fine).unwrap();
    assert!(fine.steps > coarse.steps);
    for i in 0..bases.len() {
        for (a, b) in coarse.phase[i].iter().zip(&fine.phase[i]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn geometric_extension_and_its_failure() {
    let m = SurfaceModel::f1();
    let ev = evaluator(boundary(), 0.1, c(1.0, 0.5));
    let ext = extend_into_geometric(&ev, 0.1).unwrap();
    assert!(ext.eps > 0.0 && ext.slope_at_t0 < 0.0);
    assert!(ext.im_values.iter().all(|x| *x > 0.0));
    assert_eq!(extend_into_geometric(&ev, 0.0).unwrap().eps, 0.0);

    let mut req = PathRequest::new(boundary(), 0.1, c(1.0, 0.5));
    req.weight = Some(c(-0.5, 0.0));
    let flipped = build_path(req.resolve(&m).unwrap()).unwrap();
    assert!(matches!(extend_into_geometric(&flipped, 0.1), Err(Error::Inconclusive(_))));
}

#[test]
fn w2_paths_induce_the_expected_decomposition() {
    let m = SurfaceModel::f1();
    let cat = default_catalog(&m, 10, &[vec![1], vec![-1]]);
    for (lambda, want) in [(c(1.0, -0.8), SodLabel::exc_left(-1)), (c(1.0, 0.8), SodLabel::exc_right(0))] {
        let ev = evaluator(w2(), 0.0, lambda);
        let h = (100.0 * ev.t0()).max(3e5 / lambda.norm());
        let r = quasi_convergence_report(&ev, &cat, h, &QcOptions::default()).unwrap();
        assert!(r.conclusive, "{lambda}: {:?}", r.reasons);
        assert_eq!(r.sod, Some(want));
        assert_eq!(induced_sod(&r, -1).unwrap(), want);
        assert!(induced_sod(&r, 0).is_err());
    }
}
