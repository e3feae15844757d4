mod common;

use std::f64::consts::PI;

use blowup_paths::specfun::{ei, ei_arg_rate, find_t0, LambdaBox};
use common::{c, ei_reference};
use num_complex::Complex64;
use proptest::prelude::*;

fn polar() -> impl Strategy<Value = Complex64> {
    ((0.1f64).ln()..(50.0f64).ln(), -PI..PI).prop_map(|(lr, a)| Complex64::from_polar(lr.exp(), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn agrees_with_quadrature(z in polar()) {
        let got = ei(z).unwrap().value;
        let want = ei_reference(z);
        prop_assert!((got - want).norm() <= 1e-10 * want.norm(), "{z}: {got} vs {want}");
    }

    #[test]
    fn conjugation_symmetry(z in polar()) {
        prop_assume!(z.im.abs() > 1e-3);
        let (a, b) = (ei(z).unwrap().value, ei(z.conj()).unwrap().value);
        prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn derivative_is_exp_over_z(z in polar()) {
        // Stay clear of the cut on the negative real axis.
        prop_assume!(z.re > 0.0 || z.im.abs() > 0.1);
        let h = 1e-5 * z.norm();
        let fd = (ei(z + h).unwrap().value - ei(z - h).unwrap().value) / (2.0 * h);
        let want = z.exp() / z;
        prop_assert!((fd - want).norm() <= 1e-6 * want.norm().max(1e-3), "{z}: {fd} vs {want}");
    }

    #[test]
    fn asymptotic_ratio(r in prop::sample::select(vec![30.0, 100.0, 300.0]), a in -1.2f64..1.2) {
        let z = Complex64::from_polar(r, a);
        let dev = (ei(z).unwrap().value * z * (-z).exp() - 1.0).norm();
        prop_assert!(dev <= 2.0 / r, "{z}: {dev}");
    }

    #[test]
    fn arg_rate_sign_and_conjugation(re in 0.5f64..2.0, im in 0.1f64..1.0, k in 0usize..200) {
        let l = c(re, im);
        let t0 = find_t0(&LambdaBox::point(l), 1.0).unwrap();
        let t = t0 + 0.25 * k as f64;
        let up = ei_arg_rate(l, t).unwrap();
        let down = ei_arg_rate(l.conj(), t).unwrap();
        prop_assert!(up > 0.0);
        prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1.0));
    }
}

#[test]
fn principal_branch_is_continuous_off_the_cut() {
    for r in [0.3, 2.0, 15.0, 45.0] {
        let n = 20_000;
        let mut prev = ei(Complex64::from_polar(r, -PI + 1e-3)).unwrap().value;
        for i in 1..=n {
            let a = -PI + 1e-3 + (2.0 * PI - 2e-3) * i as f64 / n as f64;
            let z = Complex64::from_polar(r, a);
            let cur = ei(z).unwrap().value;
            let step = r * (2.0 * PI) / n as f64;
            let bound = 2.0 * step * (r.exp() / r);
            assert!((cur - prev).norm() <= bound, "jump at {z}");
            prev = cur;
        }
    }
}

#[test]
fn stokes_jump_across_the_cut() {
    for x in [-0.5, -3.0, -20.0] {
        let above = ei(c(x, 1e-12)).unwrap().value;
        let below = ei(c(x, -1e-12)).unwrap().value;
        assert!(((above - below).im - 2.0 * PI).abs() < 1e-9, "{x}");
        assert_eq!(ei(c(x, 0.0)).unwrap().value.im, 0.0);
    }
}

#[test]
fn real_axis_values() {
    assert!((ei(c(1.0, 0.0)).unwrap().value.re - 1.895_117_816_355_936_8).abs() < 1e-14);
    assert!((ei(c(-1.0, 0.0)).unwrap().value.re + 0.219_383_934_395_520_27).abs() < 1e-15);
}
