//! Numerical Grothendieck lattice of the blowup `f: X → Y` at a point.
//!
//! A class is stored as `(r, d, e, c2)` where `ch₁ = f*d + e·C` and `c2` is
//! `ch₂` paired with the point class. Intersection numbers follow
//! `f*D·f*D′ = D·D′`, `f*D·C = 0`, `C² = −1`, and `K_X = f*K_Y + C`.
//!
//! Lattice data is exact (`Rational64`). Real divisor parameters enter only
//! through [`Divisor`] and [`twist_real`].

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar used for lattice data.
pub type Q = Rational64;

/// Shorthand for an integer as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// Shorthand for `n/d`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Surface `Y` together with the data needed to intersect classes on its blowup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModel {
    rho: usize,
    qy: Vec<Vec<Q>>,
    ky: Vec<Q>,
}

impl SurfaceModel {
    /// Builds a model from the Picard rank, intersection matrix and canonical class of `Y`.
    pub fn new(rho: usize, qy: Vec<Vec<Q>>, ky: Vec<Q>) -> Result<Self> {
        if rho < 1 {
            return Err(Error::InvalidModel("picard rank must be at least 1".into()));
        }
        if qy.len() != rho || qy.iter().any(|row| row.len() != rho) {
            return Err(Error::InvalidModel(format!("intersection matrix must be {rho}x{rho}")));
        }
        if ky.len() != rho {
            return Err(Error::InvalidModel(format!("canonical class must have {rho} entries")));
        }
        for i in 0..rho {
            for j in 0..i {
                if qy[i][j] != qy[j][i] {
                    return Err(Error::InvalidModel(format!(
                        "intersection matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { rho, qy, ky })
    }

    /// `P²` blown up at a point: `ρ = 1`, `Q_Y = (1)`, `K_Y = −3H`.
    pub fn f1() -> Self {
        Self::new(1, vec![vec![q(1)]], vec![q(-3)]).expect("F1 model is valid")
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn qy(&self) -> &[Vec<Q>] {
        &self.qy
    }

    pub fn ky(&self) -> &[Q] {
        &self.ky
    }

    /// Length of a class vector `(r, d₁..d_ρ, e, c2)`.
    pub fn dim(&self) -> usize {
        self.rho + 3
    }

    /// `aᵀ Q_Y b`.
    pub fn dot_y(&self, a: &[Q], b: &[Q]) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rho {
            for j in 0..self.rho {
                s += a[i] * self.qy[i][j] * b[j];
            }
        }
        s
    }

    /// Floating-point `aᵀ Q_Y b`.
    pub fn dot_y_f64(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rho {
            for j in 0..self.rho {
                s += a[i] * q_to_f64(&self.qy[i][j]) * b[j];
            }
        }
        s
    }

    /// `K_Y²`.
    pub fn ky2(&self) -> Q {
        self.dot_y(&self.ky, &self.ky)
    }

    /// `K_X = f*K_Y + C`.
    pub fn canonical_x(&self) -> RatDivisor {
        RatDivisor { b: self.ky.clone(), bc: Q::one() }
    }

    /// `ch₁(v)·B`.
    pub fn ch1_dot(&self, v: &ChernClass, b: &RatDivisor) -> Q {
        self.dot_y(&v.d, &b.b) - v.e * b.bc
    }

    /// `B·B′` on `X`.
    pub fn divisor_dot(&self, a: &RatDivisor, b: &RatDivisor) -> Q {
        self.dot_y(&a.b, &b.b) - a.bc * b.bc
    }

    /// Real `B·B′` on `X`.
    pub fn divisor_dot_real(&self, a: &Divisor, b: &Divisor) -> f64 {
        self.dot_y_f64(&a.b, &b.b) - a.bc * b.bc
    }

    /// Floating-point copy of `Q_Y`.
    pub fn qy_f64(&self) -> Vec<Vec<f64>> {
        self.qy.iter().map(|r| r.iter().map(q_to_f64).collect()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SurfaceModelRepr {
    rho: usize,
    #[serde(rename = "QY")]
    qy: Vec<Vec<RatRepr>>,
    #[serde(rename = "KY")]
    ky: Vec<RatRepr>,
}

/// JSON form of a rational: an integer, a float with an exact small
/// denominator, or a `"p/q"` string.
#[derive(Clone, Copy)]
struct RatRepr(Q);

impl Serialize for RatRepr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for RatRepr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        parse_rational(&v).map(RatRepr).map_err(de::Error::custom)
    }
}

/// Parses a JSON integer or `"p/q"` string into an exact rational.
pub fn parse_rational(v: &serde_json::Value) -> std::result::Result<Q, String> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(q(i))
            } else {
                Err(format!("expected an integer or \"p/q\" string, found {n}"))
            }
        }
        serde_json::Value::String(s) => {
            let mut parts = s.splitn(2, '/');
            let num = parts.next().unwrap_or("").trim().parse::<i64>();
            let den = parts.next().map(|d| d.trim().parse::<i64>()).unwrap_or(Ok(1));
            match (num, den) {
                (Ok(n), Ok(d)) if d != 0 => Ok(Q::new(n, d)),
                _ => Err(format!("cannot parse rational {s:?}")),
            }
        }
        other => Err(format!("expected a rational, found {other}")),
    }
}

impl Serialize for SurfaceModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SurfaceModelRepr {
            rho: self.rho,
            qy: self.qy.iter().map(|r| r.iter().map(|x| RatRepr(*x)).collect()).collect(),
            ky: self.ky.iter().map(|x| RatRepr(*x)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SurfaceModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SurfaceModelRepr::deserialize(d)?;
        SurfaceModel::new(
            r.rho,
            r.qy.into_iter().map(|row| row.into_iter().map(|x| x.0).collect()).collect(),
            r.ky.into_iter().map(|x| x.0).collect(),
        )
        .map_err(de::Error::custom)
    }
}

/// Element `(r, d, e, c2)` of the numerical lattice of `X`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChernClass {
    pub r: Q,
    pub d: Vec<Q>,
    pub e: Q,
    pub c2: Q,
}

impl ChernClass {
    pub fn new(r: Q, d: Vec<Q>, e: Q, c2: Q) -> Self {
        Self { r, d, e, c2 }
    }

    pub fn zero(rho: usize) -> Self {
        Self { r: Q::zero(), d: vec![Q::zero(); rho], e: Q::zero(), c2: Q::zero() }
    }

    /// Class of a skyscraper sheaf.
    pub fn point(rho: usize) -> Self {
        Self { c2: Q::one(), ..Self::zero(rho) }
    }

    /// `i`-th basis vector in the order `(r, d₁..d_ρ, e, c2)`.
    pub fn basis(rho: usize, i: usize) -> Self {
        let mut v = Self::zero(rho);
        match i {
            0 => v.r = Q::one(),
            i if i <= rho => v.d[i - 1] = Q::one(),
            i if i == rho + 1 => v.e = Q::one(),
            _ => v.c2 = Q::one(),
        }
        v
    }

    pub fn rho(&self) -> usize {
        self.d.len()
    }

    pub fn scale(&self, m: Q) -> Self {
        Self {
            r: self.r * m,
            d: self.d.iter().map(|x| *x * m).collect(),
            e: self.e * m,
            c2: self.c2 * m,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.e.is_zero() && self.c2.is_zero() && self.d.iter().all(Zero::is_zero)
    }

    /// Coordinates `(r, d₁..d_ρ, e, c2)` as floats.
    pub fn to_f64(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.d.len() + 3);
        v.push(q_to_f64(&self.r));
        v.extend(self.d.iter().map(q_to_f64));
        v.push(q_to_f64(&self.e));
        v.push(q_to_f64(&self.c2));
        v
    }
}

impl Add for &ChernClass {
    type Output = ChernClass;
    fn add(self, o: &ChernClass) -> ChernClass {
        ChernClass {
            r: self.r + o.r,
            d: self.d.iter().zip(&o.d).map(|(a, b)| *a + *b).collect(),
            e: self.e + o.e,
            c2: self.c2 + o.c2,
        }
    }
}

impl Sub for &ChernClass {
    type Output = ChernClass;
    fn sub(self, o: &ChernClass) -> ChernClass {
        self + &(-o)
    }
}

impl Neg for &ChernClass {
    type Output = ChernClass;
    fn neg(self) -> ChernClass {
        self.scale(-Q::one())
    }
}

impl fmt::Display for ChernClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.d.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, [{}], {}, {})", self.r, d.join(", "), self.e, self.c2)
    }
}

/// Exact divisor class `f*b + bC·C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatDivisor {
    pub b: Vec<Q>,
    pub bc: Q,
}

impl RatDivisor {
    pub fn zero(rho: usize) -> Self {
        Self { b: vec![Q::zero(); rho], bc: Q::zero() }
    }

    /// The exceptional curve `C`.
    pub fn exceptional(rho: usize) -> Self {
        Self { b: vec![Q::zero(); rho], bc: Q::one() }
    }

    pub fn scale(&self, m: Q) -> Self {
        Self { b: self.b.iter().map(|x| *x * m).collect(), bc: self.bc * m }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { b: self.b.iter().zip(&o.b).map(|(a, c)| *a + *c).collect(), bc: self.bc + o.bc }
    }

    pub fn to_real(&self) -> Divisor {
        Divisor { b: self.b.iter().map(q_to_f64).collect(), bc: q_to_f64(&self.bc) }
    }
}

/// Real divisor class `f*b + bC·C`, used for `B`, `H`, `ω` and `sC`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub b: Vec<f64>,
    #[serde(rename = "bC")]
    pub bc: f64,
}

impl Divisor {
    pub fn new(b: Vec<f64>, bc: f64) -> Self {
        Self { b, bc }
    }

    pub fn zero(rho: usize) -> Self {
        Self { b: vec![0.0; rho], bc: 0.0 }
    }

    /// `s·C`.
    pub fn exceptional_multiple(rho: usize, s: f64) -> Self {
        Self { b: vec![0.0; rho], bc: s }
    }

    pub fn scale(&self, m: f64) -> Self {
        Self { b: self.b.iter().map(|x| x * m).collect(), bc: self.bc * m }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { b: self.b.iter().zip(&o.b).map(|(a, c)| a + c).collect(), bc: self.bc + o.bc }
    }

    /// `B·C = −bC`.
    pub fn dot_c(&self) -> f64 {
        -self.bc
    }
}

/// Twisted character `ch^B = e^{−B}·ch`, exact.
pub fn twist(model: &SurfaceModel, v: &ChernClass, b: &RatDivisor) -> ChernClass {
    let b_dot_ch1 = model.ch1_dot(v, b);
    let b2 = model.divisor_dot(b, b);
    ChernClass {
        r: v.r,
        d: v.d.iter().zip(&b.b).map(|(di, bi)| *di - v.r * *bi).collect(),
        e: v.e - v.r * b.bc,
        c2: v.c2 - b_dot_ch1 + b2 * v.r / q(2),
    }
}

/// Twisted character on real coordinates `(r, d, e, c2)`.
pub fn twist_real(model: &SurfaceModel, v: &[f64], b: &Divisor) -> Vec<f64> {
    let rho = model.rho();
    let r = v[0];
    let d = &v[1..=rho];
    let e = v[rho + 1];
    let c2 = v[rho + 2];
    let b_dot_ch1 = model.dot_y_f64(d, &b.b) - e * b.bc;
    let b2 = model.divisor_dot_real(b, b);
    let mut out = Vec::with_capacity(rho + 3);
    out.push(r);
    out.extend(d.iter().zip(&b.b).map(|(di, bi)| di - r * bi));
    out.push(e - r * b.bc);
    out.push(c2 - b_dot_ch1 + 0.5 * b2 * r);
    out
}

/// `χ(O_C(k)) = ch₂ + ch₁·(−K_X)/2`.
pub fn euler_pairing_point_curve(model: &SurfaceModel, k: i64) -> i64 {
    let v = chern_of(model, &CatalogObject::curve(k));
    let minus_kx = model.canonical_x().scale(-Q::one());
    let chi = v.c2 + model.ch1_dot(&v, &minus_kx) / q(2);
    debug_assert!(chi.is_integer());
    chi.to_integer()
}

/// Unshifted objects of the test catalog.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseObject {
    /// Skyscraper at a point away from `C`, equal to `f*O_y`.
    PointOffC,
    /// Skyscraper at a point of `C`.
    PointOnC,
    /// `Lf*O_o` for the blown-up point `o`; class of a point.
    PullbackCenter,
    /// `O_C(k)`.
    Curve(i64),
    /// `f*L` for the line bundle with integer class `L` on `Y`.
    Pullback(Vec<i64>),
}

/// A catalog object: a base object shifted by `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CatalogObject {
    pub base: BaseObject,
    pub shift: i64,
}

impl CatalogObject {
    pub fn new(base: BaseObject, shift: i64) -> Self {
        Self { base, shift }
    }

    pub fn curve(k: i64) -> Self {
        Self::new(BaseObject::Curve(k), 0)
    }

    pub fn point_off_c() -> Self {
        Self::new(BaseObject::PointOffC, 0)
    }

    pub fn point_on_c() -> Self {
        Self::new(BaseObject::PointOnC, 0)
    }

    pub fn pullback_center() -> Self {
        Self::new(BaseObject::PullbackCenter, 0)
    }

    pub fn pullback(l: Vec<i64>) -> Self {
        Self::new(BaseObject::Pullback(l), 0)
    }

    pub fn shifted(&self, n: i64) -> Self {
        Self { base: self.base.clone(), shift: self.shift + n }
    }

    pub fn unshifted(&self) -> Self {
        Self { base: self.base.clone(), shift: 0 }
    }

    pub fn name(&self) -> String {
        let base = match &self.base {
            BaseObject::PointOffC => "O_x(off C)".to_string(),
            BaseObject::PointOnC => "O_x(on C)".to_string(),
            BaseObject::PullbackCenter => "f*O_o".to_string(),
            BaseObject::Curve(0) => "O_C".to_string(),
            BaseObject::Curve(k) => format!("O_C({k})"),
            BaseObject::Pullback(l) if l.iter().all(|x| *x == 0) => "f*O_Y".to_string(),
            BaseObject::Pullback(l) => {
                let parts: Vec<String> = l.iter().map(|x| x.to_string()).collect();
                format!("f*L({})", parts.join(","))
            }
        };
        if self.shift == 0 {
            base
        } else {
            format!("{base}[{}]", self.shift)
        }
    }
}

impl fmt::Display for CatalogObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for CatalogObject {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Class of a catalog object.
pub fn chern_of(model: &SurfaceModel, obj: &CatalogObject) -> ChernClass {
    let rho = model.rho();
    let v = match &obj.base {
        BaseObject::PointOffC | BaseObject::PointOnC | BaseObject::PullbackCenter => {
            ChernClass::point(rho)
        }
        BaseObject::Curve(k) => ChernClass {
            r: Q::zero(),
            d: vec![Q::zero(); rho],
            e: Q::one(),
            c2: q(*k) + qf(1, 2),
        },
        BaseObject::Pullback(l) => {
            let lq: Vec<Q> = (0..rho).map(|i| q(l.get(i).copied().unwrap_or(0))).collect();
            let l2 = model.dot_y(&lq, &lq);
            ChernClass { r: Q::one(), d: lq, e: Q::zero(), c2: l2 / q(2) }
        }
    };
    if obj.shift.rem_euclid(2) == 1 {
        -&v
    } else {
        v
    }
}

/// Recollement label selecting a gluing region for declared HN data.
///
/// `R(n)` has `f^L_n D^b(Y)` on the left and `⟨O_C(n)⟩` on the right;
/// `L(k)` has `⟨O_C(k)⟩` on the left and `f^L_{k+1} D^b(Y)` on the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gluing {
    R(i64),
    L(i64),
}

/// One HN factor with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HnFactor {
    pub object: CatalogObject,
    pub multiplicity: u32,
}

fn factor(base: BaseObject, shift: i64, multiplicity: i64) -> Option<HnFactor> {
    (multiplicity > 0).then(|| HnFactor {
        object: CatalogObject::new(base, shift),
        multiplicity: multiplicity as u32,
    })
}

/// Declared HN factors of `obj` in the gluing region of `g`.
///
/// The factors are the pieces of the semiorthogonal projection triangle,
/// split into indecomposable summands. The Ext groups between sheaves on `C`
/// are read off from `Ext^i_X(O_C(a), O_C(b)) = H^i(O(b−a)) ⊕ H^{i−1}(O(b−a−1))`.
/// Only `R(0)` and `L(−1)` are declared, since those are the regions that
/// the path families end in.
pub fn declared_hn(obj: &CatalogObject, g: Gluing) -> Result<Vec<HnFactor>> {
    use BaseObject::*;
    let mut out: Vec<Option<HnFactor>> = Vec::new();
    match g {
        Gluing::R(0) => match &obj.base {
            PointOffC | PullbackCenter | Pullback(_) => out.push(factor(obj.base.clone(), 0, 1)),
            PointOnC => {
                out.push(factor(Curve(0), 0, 1));
                out.push(factor(Curve(0), -1, 1));
                out.push(factor(PullbackCenter, 0, 1));
            }
            Curve(j) => {
                let j = *j;
                if j >= 0 {
                    out.push(factor(Curve(0), 0, j + 1));
                    out.push(factor(Curve(0), -1, j));
                    out.push(factor(PullbackCenter, 0, j));
                } else {
                    out.push(factor(Curve(0), -1, -j - 1));
                    out.push(factor(Curve(0), -2, -j));
                    out.push(factor(PullbackCenter, -1, -j));
                }
            }
        },
        Gluing::L(-1) => match &obj.base {
            PointOffC | PullbackCenter | Pullback(_) => out.push(factor(obj.base.clone(), 0, 1)),
            PointOnC => {
                out.push(factor(PullbackCenter, 0, 1));
                out.push(factor(Curve(-1), 1, 1));
                out.push(factor(Curve(-1), 2, 1));
            }
            Curve(j) => {
                let j = *j;
                if j >= 0 {
                    out.push(factor(PullbackCenter, 0, j + 1));
                    out.push(factor(Curve(-1), 1, j));
                    out.push(factor(Curve(-1), 2, j + 1));
                } else {
                    out.push(factor(PullbackCenter, -1, -j - 1));
                    out.push(factor(Curve(-1), 0, -j));
                    out.push(factor(Curve(-1), 1, -1 - j));
                }
            }
        },
        other => {
            return Err(Error::Undeclared(format!("{other:?} is not a declared gluing region")))
        }
    }
    Ok(out
        .into_iter()
        .flatten()
        .map(|f| HnFactor { object: f.object.shifted(obj.shift), multiplicity: f.multiplicity })
        .collect())
}

/// Sum of the classes of the factors, counted with multiplicity.
pub fn hn_class_sum(model: &SurfaceModel, factors: &[HnFactor]) -> ChernClass {
    factors.iter().fold(ChernClass::zero(model.rho()), |acc, f| {
        &acc + &chern_of(model, &f.object).scale(q(f.multiplicity as i64))
    })
}

/// Default catalog: skyscrapers, `O_C(k)` for `|k| ≤ bound`, a few shifts of
/// the exceptional objects, and pullbacks of `O_Y` and the given line bundles.
pub fn default_catalog(model: &SurfaceModel, bound: i64, line_bundles: &[Vec<i64>]) -> Vec<CatalogObject> {
    let mut v = vec![
        CatalogObject::point_off_c(),
        CatalogObject::point_on_c(),
        CatalogObject::pullback_center(),
    ];
    for k in -bound..=bound {
        v.push(CatalogObject::curve(k));
    }
    for (k, n) in [(-1, 1), (-1, 2), (0, 1), (0, -1)] {
        v.push(CatalogObject::curve(k).shifted(n));
    }
    v.push(CatalogObject::pullback(vec![0; model.rho()]));
    for l in line_bundles {
        v.push(CatalogObject::pullback(l.clone()));
    }
    v
}

/// Largest absolute numerator or denominator, used to keep fuzz inputs small.
pub fn height(v: &ChernClass) -> i64 {
    let mut h = 0i64;
    for x in std::iter::once(&v.r).chain(&v.d).chain([&v.e, &v.c2]) {
        h = h.max(x.numer().abs()).max(x.denom().abs());
    }
    h.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_intersections() {
        let m = SurfaceModel::f1();
        let c = RatDivisor::exceptional(1);
        let h = RatDivisor { b: vec![q(1)], bc: q(0) };
        assert_eq!(m.divisor_dot(&c, &c), q(-1));
        assert_eq!(m.divisor_dot(&h, &c), q(0));
        assert_eq!(m.divisor_dot(&h, &h), q(1));
        let kx = m.canonical_x();
        assert_eq!(m.divisor_dot(&c, &kx), q(-1));
    }

    #[test]
    fn non_symmetric_rejected() {
        let r = SurfaceModel::new(2, vec![vec![q(1), q(2)], vec![q(3), q(1)]], vec![q(0), q(0)]);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
        assert!(SurfaceModel::new(0, vec![], vec![]).is_err());
        assert!(SurfaceModel::new(1, vec![vec![q(2)]], vec![q(0)]).is_ok());
    }

    #[test]
    fn catalog_classes() {
        let m = SurfaceModel::f1();
        assert_eq!(chern_of(&m, &CatalogObject::point_off_c()), ChernClass::point(1));
        let oc = chern_of(&m, &CatalogObject::curve(0));
        assert_eq!(oc, ChernClass::new(q(0), vec![q(0)], q(1), qf(1, 2)));
        let shifted = chern_of(&m, &CatalogObject::curve(2).shifted(3));
        assert_eq!(shifted, -&chern_of(&m, &CatalogObject::curve(2)));
        let fl = chern_of(&m, &CatalogObject::pullback(vec![1]));
        assert_eq!(fl, ChernClass::new(q(1), vec![q(1)], q(0), qf(1, 2)));
    }

    #[test]
    fn twist_examples() {
        let m = SurfaceModel::f1();
        let s = qf(3, 7);
        let v = ChernClass::basis(1, 0);
        let b = RatDivisor { b: vec![q(0)], bc: s };
        assert_eq!(twist(&m, &v, &b), ChernClass::new(q(1), vec![q(0)], -s, -s * s / q(2)));
        let p = ChernClass::point(1);
        assert_eq!(twist(&m, &p, &b), p);
        assert_eq!(twist(&m, &v, &RatDivisor::zero(1)), v);
    }

    #[test]
    fn euler_pairing() {
        let m = SurfaceModel::f1();
        assert_eq!(euler_pairing_point_curve(&m, 0), 1);
        assert_eq!(euler_pairing_point_curve(&m, -1), 0);
        assert_eq!(euler_pairing_point_curve(&m, 3), 4);
    }

    #[test]
    fn declared_hn_sums_to_class() {
        let m = SurfaceModel::f1();
        for g in [Gluing::R(0), Gluing::L(-1)] {
            for obj in default_catalog(&m, 10, &[vec![1], vec![-2]]) {
                for n in [-2, 0, 1] {
                    let o = obj.shifted(n);
                    let f = declared_hn(&o, g).unwrap();
                    assert_eq!(hn_class_sum(&m, &f), chern_of(&m, &o), "{o} in {g:?}");
                }
            }
        }
        assert!(declared_hn(&CatalogObject::curve(0), Gluing::R(3)).is_err());
    }

    #[test]
    fn model_json_roundtrip() {
        let m = SurfaceModel::new(1, vec![vec![q(2)]], vec![q(0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rho":1,"QY":[[2]],"KY":[0]}"#);
        let back: SurfaceModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let half: SurfaceModel = serde_json::from_str(r#"{"rho":1,"QY":[["1/2"]],"KY":[-3]}"#).unwrap();
        assert_eq!(half.qy()[0][0], qf(1, 2));
        assert!(serde_json::from_str::<SurfaceModel>(r#"{"rho":2,"QY":[[1,2],[0,1]],"KY":[0,0]}"#).is_err());
    }
}
