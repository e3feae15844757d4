//! Central charges as complex-linear functionals on the lattice.
//!
//! Every charge is stored by its values on the basis `(r, d₁..d_ρ, e, c2)`,
//! so evaluation is one complex dot product.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{chern_of, q, qf, twist_real, CatalogObject, ChernClass, Divisor, SurfaceModel, Q};
use crate::specfun::{ei_scaled, Scaled};

fn qv(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// How a charge was constructed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChargeKind {
    Geometric { b: Divisor, h: Divisor },
    Normalized { alpha: f64, beta: f64, b: Divisor, omega: Divisor },
    Glued { lambda: Complex64, k: i64 },
    PathSnapshot { t: f64 },
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralCharge {
    pub kind: ChargeKind,
    /// Values on the lattice basis.
    pub values: Vec<Complex64>,
}

impl CentralCharge {
    pub fn explicit(values: Vec<Complex64>) -> Self {
        Self { kind: ChargeKind::Explicit, values }
    }

    fn from_real_fn(model: &SurfaceModel, kind: ChargeKind, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..model.dim())
            .map(|i| {
                let mut e = vec![0.0; model.dim()];
                e[i] = 1.0;
                f(&e)
            })
            .collect();
        Self { kind, values }
    }

    pub fn eval(&self, v: &ChernClass) -> Complex64 {
        self.eval_real(&v.to_f64())
    }

    /// Evaluation on real coordinates `(r, d, e, c2)`.
    pub fn eval_real(&self, v: &[f64]) -> Complex64 {
        self.values.iter().zip(v).map(|(z, x)| z * x).sum()
    }

    pub fn eval_object(&self, model: &SurfaceModel, obj: &CatalogObject) -> Complex64 {
        self.eval(&chern_of(model, obj))
    }
}

/// `Z_{B,H}(v) = −ch₂^B + (H²/2)·ch₀ + i·H·ch₁^B`.
pub fn geometric_charge(model: &SurfaceModel, b: &Divisor, h: &Divisor) -> Result<CentralCharge> {
    let h2 = model.divisor_dot_real(h, h);
    if !(h2 > 0.0) {
        return Err(Error::Domain(format!("H² = {h2} is not positive")));
    }
    let rho = model.rho();
    Ok(CentralCharge::from_real_fn(
        model,
        ChargeKind::Geometric { b: b.clone(), h: h.clone() },
        |v| {
            let w = twist_real(model, v, b);
            let h_ch1 = model.dot_y_f64(&w[1..=rho], &h.b) - w[rho + 1] * h.bc;
            Complex64::new(-w[rho + 2] + 0.5 * h2 * w[0], h_ch1)
        },
    ))
}

/// `Z(v) = (α − iβ)·r + (B + iω)·ch₁ − ch₂`.
pub fn normalized_charge(model: &SurfaceModel, alpha: f64, beta: f64, b: &Divisor, omega: &Divisor) -> CentralCharge {
    let rho = model.rho();
    CentralCharge::from_real_fn(
        model,
        ChargeKind::Normalized { alpha, beta, b: b.clone(), omega: omega.clone() },
        |v| {
            let d = &v[1..=rho];
            let e = v[rho + 1];
            let bd = model.dot_y_f64(d, &b.b) - e * b.bc;
            let wd = model.dot_y_f64(d, &omega.b) - e * omega.bc;
            Complex64::new(alpha, -beta) * v[0] + Complex64::new(bd, wd) - v[rho + 2]
        },
    )
}

/// Class on `Y`: `(r, d, c2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YClass {
    pub r: Q,
    pub d: Vec<Q>,
    pub c2: Q,
}

impl YClass {
    pub fn point(rho: usize) -> Self {
        Self { r: Q::zero(), d: vec![Q::zero(); rho], c2: q(1) }
    }

    /// Basis `(r, d₁..d_ρ, c2)` of the `Y`-lattice.
    pub fn basis(rho: usize, i: usize) -> Self {
        let mut v = Self { r: Q::zero(), d: vec![Q::zero(); rho], c2: Q::zero() };
        match i {
            0 => v.r = q(1),
            i if i <= rho => v.d[i - 1] = q(1),
            _ => v.c2 = q(1),
        }
        v
    }

    /// `f*` of the class.
    pub fn pullback(&self) -> ChernClass {
        ChernClass::new(self.r, self.d.clone(), Q::zero(), self.c2)
    }
}

/// Normalized charge on `Y`: `Z_Y = (α − iβ)·r + (B + iω)·d − c2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YCharge {
    pub alpha: f64,
    pub beta: f64,
    pub b: Vec<f64>,
    pub omega: Vec<f64>,
}

impl YCharge {
    pub fn eval(&self, model: &SurfaceModel, w: &YClass) -> Complex64 {
        let d: Vec<f64> = w.d.iter().map(qv).collect();
        Complex64::new(self.alpha, -self.beta) * qv(&w.r)
            + Complex64::new(model.dot_y_f64(&d, &self.b), model.dot_y_f64(&d, &self.omega))
            - qv(&w.c2)
    }

    fn eval_real(&self, model: &SurfaceModel, r: f64, d: &[f64], c2: f64) -> Complex64 {
        Complex64::new(self.alpha, -self.beta) * r
            + Complex64::new(model.dot_y_f64(d, &self.b), model.dot_y_f64(d, &self.omega))
            - c2
    }
}

/// `v = f*w + m·ch(O_C(k))` with `m = e(v)`.
pub fn decompose_class(v: &ChernClass, k: i64) -> (YClass, Q) {
    let m = v.e;
    let w = YClass { r: v.r, d: v.d.clone(), c2: v.c2 - m * (q(k) + qf(1, 2)) };
    (w, m)
}

pub fn recompose(w: &YClass, m: Q, k: i64) -> ChernClass {
    let oc = ChernClass::new(Q::zero(), vec![Q::zero(); w.d.len()], q(1), q(k) + qf(1, 2));
    &w.pullback() + &oc.scale(m)
}

/// Glued charge: `Z(v) = Z_Y(w) + m·e^λ` with `(w, m) = decompose_class(v, k+1)`.
pub fn glued_charge(model: &SurfaceModel, zy: &YCharge, lambda: Complex64, k: i64) -> CentralCharge {
    let rho = model.rho();
    let el = lambda.exp();
    let shift = k as f64 + 1.5;
    CentralCharge::from_real_fn(model, ChargeKind::Glued { lambda, k }, |v| {
        let m = v[rho + 1];
        zy.eval_real(model, v[0], &v[1..=rho], v[rho + 2] - m * shift) + el * m
    })
}

/// Time-dependent charge
/// `Z_t(v) = w·(Ei(λt) − Ei(λT₀))·(−e(v) − s·r(v)) + Z₀(twist(v, −sC))`.
///
/// With `subtract_t0 = false` the difference is replaced by `Ei(λt)` alone.
#[derive(Clone, Debug)]
pub struct PathCharge {
    pub model: SurfaceModel,
    pub z0: CentralCharge,
    pub s: f64,
    pub lambda: Complex64,
    pub t0: f64,
    pub weight: Complex64,
    pub subtract_t0: bool,
    ei_t0: Scaled,
    /// `Z_{0,sC}` on the basis.
    shifted: CentralCharge,
}

impl PathCharge {
    pub fn new(
        model: &SurfaceModel,
        z0: CentralCharge,
        s: f64,
        lambda: Complex64,
        t0: f64,
        weight: Complex64,
        subtract_t0: bool,
    ) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::Domain(format!("T₀ must be positive, got {t0}")));
        }
        if lambda.is_zero() {
            return Err(Error::Domain("λ = 0".into()));
        }
        let ei_t0 = if subtract_t0 { ei_scaled(lambda * t0)? } else { Scaled::from_value(Complex64::zero()) };
        let sc = Divisor::exceptional_multiple(model.rho(), -s);
        let shifted = CentralCharge::from_real_fn(model, ChargeKind::Explicit, |v| {
            z0.eval_real(&twist_real(model, v, &sc))
        });
        Ok(Self { model: model.clone(), z0, s, lambda, t0, weight, subtract_t0, ei_t0, shifted })
    }

    /// Real coefficient `ch₁^{−sC}(v)·C = −e − s·r`.
    pub fn time_coefficient(&self, v: &[f64]) -> f64 {
        let rho = self.model.rho();
        -v[rho + 1] - self.s * v[0]
    }

    /// `Z_{0,sC}(v)`.
    pub fn base_value(&self, v: &[f64]) -> Complex64 {
        self.shifted.eval_real(v)
    }

    /// Coefficients `(a, b)` with `Z_t(v) = a·D(t) + b`.
    pub fn affine(&self, v: &ChernClass) -> (f64, Complex64) {
        let x = v.to_f64();
        (self.time_coefficient(&x), self.base_value(&x))
    }

    /// `D(t) = w·(Ei(λt) − Ei(λT₀))`, valid for any `t > 0`.
    pub fn delta_unchecked(&self, t: f64) -> Result<Scaled> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        if self.subtract_t0 && t == self.t0 {
            return Ok(Scaled::from_value(Complex64::zero()));
        }
        let e = ei_scaled(self.lambda * t)?;
        Ok(e.add(&self.ei_t0.mul(Complex64::new(-1.0, 0.0))).mul(self.weight))
    }

    /// `Ei(λT₀)`, or zero when nothing is subtracted.
    pub fn ei_t0(&self) -> Scaled {
        self.ei_t0
    }

    pub fn delta(&self, t: f64) -> Result<Scaled> {
        self.check_t(t)?;
        self.delta_unchecked(t)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t < self.t0 {
            Err(Error::Domain(format!("t = {t} is below T₀ = {}", self.t0)))
        } else {
            Ok(())
        }
    }

    /// `Z_t(v)` without overflow.
    pub fn eval_scaled(&self, v: &ChernClass, t: f64) -> Result<Scaled> {
        self.check_t(t)?;
        let (a, b) = self.affine(v);
        Ok(combine(a, b, &self.delta_unchecked(t)?))
    }

    pub fn eval(&self, v: &ChernClass, t: f64) -> Result<Complex64> {
        Ok(self.eval_scaled(v, t)?.value())
    }

    /// `Z_t(v)` for `t` below `T₀` as well.
    pub fn eval_unchecked(&self, v: &ChernClass, t: f64) -> Result<Complex64> {
        let (a, b) = self.affine(v);
        Ok(combine(a, b, &self.delta_unchecked(t)?).value())
    }

    /// Snapshot `Z_t` on the basis; fails if a value overflows.
    pub fn snapshot(&self, t: f64) -> Result<CentralCharge> {
        self.check_t(t)?;
        let d = self.delta_unchecked(t)?;
        let dim = self.model.dim();
        let mut values = Vec::with_capacity(dim);
        for i in 0..dim {
            let v = ChernClass::basis(self.model.rho(), i);
            let (a, b) = self.affine(&v);
            let z = combine(a, b, &d).value();
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Domain(format!("charge overflows at t = {t}")));
            }
            values.push(z);
        }
        Ok(CentralCharge { kind: ChargeKind::PathSnapshot { t }, values })
    }

    /// `d/dt Z_t(v) = a·w·e^{λt}/t`, divided by `Z_t(v)`.
    pub fn log_derivative(&self, v: &ChernClass, t: f64) -> Result<Complex64> {
        let (a, b) = self.affine(v);
        let z = combine(a, b, &self.delta_unchecked(t)?);
        Ok(log_derivative_from(self.lambda, self.weight, a, &z, t))
    }
}

pub(crate) fn combine(a: f64, b: Complex64, d: &Scaled) -> Scaled {
    if a == 0.0 {
        Scaled::from_value(b)
    } else {
        d.mul(Complex64::new(a, 0.0)).add_value(b)
    }
}

pub(crate) fn log_derivative_from(lambda: Complex64, weight: Complex64, a: f64, z: &Scaled, t: f64) -> Complex64 {
    if a == 0.0 {
        return Complex64::zero();
    }
    let num = Complex64::from_polar((lambda.re * t - z.exponent).exp(), lambda.im * t);
    num * weight * a / (z.mantissa * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CatalogObject;

    #[test]
    fn point_is_minus_one() {
        let m = SurfaceModel::f1();
        let z = geometric_charge(&m, &Divisor::new(vec![0.3], -0.2), &Divisor::new(vec![1.5], 0.0)).unwrap();
        let p = z.eval(&ChernClass::point(1));
        assert!((p - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn curve_charge_is_real() {
        let m = SurfaceModel::f1();
        let b = Divisor::new(vec![0.3], 0.7);
        let z = geometric_charge(&m, &b, &Divisor::new(vec![2.0], 0.0)).unwrap();
        for k in -3..=3 {
            let v = z.eval_object(&m, &CatalogObject::curve(k));
            assert!(v.im.abs() < 1e-15);
            assert!((v.re + (k as f64 + 0.5 - b.dot_c())).abs() < 1e-14);
        }
    }

    #[test]
    fn nonpositive_h_rejected() {
        let m = SurfaceModel::f1();
        assert!(geometric_charge(&m, &Divisor::zero(1), &Divisor::new(vec![0.0], 1.0)).is_err());
    }

    #[test]
    fn glued_values() {
        let m = SurfaceModel::f1();
        let zy = YCharge { alpha: 0.4, beta: -0.3, b: vec![0.1], omega: vec![1.2] };
        let l = Complex64::new(0.3, 2.0);
        for k in -2..=2 {
            let z = glued_charge(&m, &zy, l, k);
            let a = z.eval_object(&m, &CatalogObject::curve(k).shifted(1));
            assert!((a - (-1.0 - l.exp())).norm() < 1e-14);
            let b = z.eval_object(&m, &CatalogObject::curve(k + 1));
            assert!((b - l.exp()).norm() < 1e-14);
            assert!((z.eval(&ChernClass::point(1)) + 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn decompose_examples() {
        let m = SurfaceModel::f1();
        for k in -3..=3 {
            let (w, mm) = decompose_class(&chern_of(&m, &CatalogObject::curve(k)), k);
            assert_eq!(mm, q(1));
            assert_eq!(w, YClass { r: Q::zero(), d: vec![Q::zero()], c2: Q::zero() });
            let v = -&chern_of(&m, &CatalogObject::curve(k - 1));
            let (w, mm) = decompose_class(&v, k);
            assert_eq!(mm, q(-1));
            assert_eq!(w, YClass::point(1));
            assert_eq!(recompose(&w, mm, k), v);
        }
    }

    #[test]
    fn path_at_t0_is_shifted_base() {
        let m = SurfaceModel::f1();
        let z0 = geometric_charge(&m, &Divisor::new(vec![0.0], 1.0), &Divisor::new(vec![1.0], 0.0)).unwrap();
        let p = PathCharge::new(&m, z0.clone(), 0.0, Complex64::new(1.0, 0.5), 2.0, Complex64::new(0.5, 0.0), true)
            .unwrap();
        for i in 0..m.dim() {
            let v = ChernClass::basis(1, i);
            assert_eq!(p.eval(&v, 2.0).unwrap(), z0.eval(&v));
        }
        assert!(p.eval(&ChernClass::point(1), 1.0).is_err());
        let px = p.eval(&ChernClass::point(1), 7.0).unwrap();
        assert!((px - z0.eval(&ChernClass::point(1))).norm() < 1e-14);
    }
}
