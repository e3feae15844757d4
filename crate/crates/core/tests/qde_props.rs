mod common;

use blowup_paths::lattice::{ChernClass, Q};
use blowup_paths::qde::{closed_form, integrate, integrate_at, log_grid, GwAction, QdeParams, QdeState};
use common::{c, rk4_log, Rk};
use num_complex::Complex64;
use proptest::prelude::*;

const KY2: f64 = 9.0;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
}

fn state() -> impl Strategy<Value = QdeState> {
    (cplx(), cplx(), cplx(), cplx(), cplx()).prop_map(|(xi0, a, d, nu, xi2)| QdeState { xi0, a, d: vec![d], nu, xi2 })
}

fn params(lambda: Complex64) -> QdeParams {
    let z = c(1.0 / lambda.norm(), 0.0);
    QdeParams::new(z, lambda * z, KY2, c(0.0, 0.0), c(0.0, 0.0)).unwrap()
}

fn lambda() -> impl Strategy<Value = Complex64> {
    (0.3f64..2.0, -3.1f64..3.1).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn xi0_and_d_are_constant(s in state(), l in lambda()) {
        let tr = integrate(&params(l), &s, 1.0, 10.0, 1e-10).unwrap();
        for st in &tr.states {
            prop_assert_eq!(st.xi0, s.xi0);
            prop_assert_eq!(&st.d, &s.d);
        }
    }

    #[test]
    fn solutions_superpose(s1 in state(), s2 in state(), l in lambda()) {
        let p = params(l);
        let grid = log_grid(1.0, 10.0, 41);
        let run = |s: &QdeState| integrate_at(&p, s, 1.0, 10.0, 1e-12, &grid).unwrap();
        let (a, b, ab) = (run(&s1), run(&s2), run(&s1.add(&s2)));
        for ((x, y), xy) in a.states.iter().zip(&b.states).zip(&ab.states) {
            let sum = x.add(y);
            let scale = 1.0 + x.xi2.norm() + y.xi2.norm() + x.nu.norm() + y.nu.norm();
            prop_assert!((sum.xi2 - xy.xi2).norm() <= 1e-9 * scale);
            prop_assert!((sum.nu - xy.nu).norm() <= 1e-9 * scale);
            prop_assert!((sum.a - xy.a).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn agrees_with_independent_rk4(s in state(), l in lambda()) {
        let p = params(l);
        let tr = integrate_at(&p, &s, 1.0, 10.0, 1e-11, &[1.0, 10.0]).unwrap();
        let init = Rk { a: s.a, nu: s.nu, xi2: s.xi2 };
        let rk = rk4_log(p.z, p.q, KY2, s.xi0, init, 1.0, 10.0, 4000);
        let (_, last) = rk.last().unwrap();
        let got = tr.states.last().unwrap();
        let scale = 1.0 + last.xi2.norm() + last.nu.norm();
        prop_assert!((got.xi2 - last.xi2).norm() <= 1e-8 * scale);
        prop_assert!((got.nu - last.nu).norm() <= 1e-8 * scale);
    }

    #[test]
    fn a_grows_like_log(c0 in cplx(), a1 in cplx(), l in lambda()) {
        let z = c(1.0 / l.norm(), 0.0);
        let p = QdeParams::new(z, l * z, KY2, c0, c(0.0, 0.0)).unwrap();
        let s = QdeState { xi0: c0, a: a1, d: vec![c(0.0, 0.0)], nu: c(0.5, 0.0), xi2: c(0.0, 0.0) };
        let tr = integrate(&p, &s, 2.0, 20.0, 1e-10).unwrap();
        for (t, st) in tr.t.iter().zip(&tr.states) {
            prop_assert!((st.a - (a1 + c0 / z * (t / 2.0).ln())).norm() <= 1e-9);
        }
    }

    #[test]
    fn closed_form_trajectories(a in cplx(), b in cplx(), l in lambda()) {
        let p = params(l);
        let z = p.z;
        let init = QdeState {
            xi0: c(0.0, 0.0),
            a: c(0.0, 0.0),
            d: vec![c(0.0, 0.0)],
            nu: -a * z * l.exp(),
            xi2: closed_form(a, b, l, 1.0).unwrap(),
        };
        let tr = integrate(&p, &init, 1.0, 10.0, 1e-10).unwrap();
        for (t, st) in tr.t.iter().zip(&tr.states) {
            let want = closed_form(a, b, l, *t).unwrap();
            let scale = want.norm().max((want - b).norm());
            prop_assert!((st.xi2 - want).norm() <= 1e-8 * scale, "t = {t}");
        }
    }
}

#[test]
fn quantum_corrections_act_only_through_the_curve() {
    let g = GwAction;
    let v = ChernClass::new(Q::new(2, 1), vec![Q::new(-3, 2)], Q::new(5, 1), Q::new(7, 3));
    let mut want = ChernClass::zero(1);
    want.e = Q::new(-5, 1);
    assert_eq!(g.apply(1, &v), want);
    for n in [0, 2, 3, -1] {
        assert_eq!(g.apply(n, &v), ChernClass::zero(1));
    }
    // H*(Y) is killed.
    let y = ChernClass::new(Q::new(1, 1), vec![Q::new(4, 1)], Q::new(0, 1), Q::new(1, 2));
    assert!(g.apply(1, &y).is_zero());
}
