//! Complex exponential integral on the principal branch.
//!
//! `Ei(z) = γ + log z + Σ_{k≥1} z^k/(k·k!)` on `ℂ∖ℝ≤0`, which equals
//! `−E₁(−z) + iπ·sgn(Im z)`. On the negative real axis the Cauchy principal
//! value `−E₁(|z|)` is returned, the mean of the two one-sided limits.
//!
//! Three evaluation regimes are used:
//! * the power series where it loses little to cancellation,
//! * a continued fraction for `E₁(−z)` in the left half-plane and far off
//!   the positive real axis,
//! * the asymptotic series `e^z/z·Σ k!/z^k` for `|z| > 40`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Radius beyond which the asymptotic series is used.
pub const ASYMPTOTIC_RADIUS: f64 = 40.0;

/// Largest cancellation exponent `|z| − Re z` accepted by the power series.
const SERIES_CANCELLATION: f64 = 10.0;

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EiRegime {
    Series,
    ContinuedFraction,
    Asymptotic,
    PvReal,
}

/// Value of `Ei` with the regime used and an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EiValue {
    pub value: Complex64,
    pub regime: EiRegime,
    pub est_error: f64,
}

/// Complex number stored as `mantissa·e^{exponent}`, for values that overflow `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub exponent: f64,
}

impl Scaled {
    pub fn new(mantissa: Complex64, exponent: f64) -> Self {
        Self { mantissa, exponent }
    }

    pub fn from_value(z: Complex64) -> Self {
        Self { mantissa: z, exponent: 0.0 }
    }

    /// Plain value; overflows to infinity when the exponent is large.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.exponent.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent
    }

    /// Principal argument.
    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn mul(&self, c: Complex64) -> Self {
        Self { mantissa: self.mantissa * c, exponent: self.exponent }
    }

    pub fn add(&self, o: &Scaled) -> Self {
        if o.is_zero() {
            return *self;
        }
        if self.is_zero() {
            return *o;
        }
        let x = self.exponent.max(o.exponent);
        let m = self.mantissa * (self.exponent - x).exp() + o.mantissa * (o.exponent - x).exp();
        Self { mantissa: m, exponent: x }
    }

    pub fn add_value(&self, z: Complex64) -> Self {
        self.add(&Scaled::from_value(z))
    }

    /// `self / o` as a plain complex number.
    pub fn ratio(&self, o: &Scaled) -> Complex64 {
        self.mantissa / o.mantissa * (self.exponent - o.exponent).exp()
    }
}

fn sgn0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    fn add(&mut self, z: Complex64) {
        fn step(sum: &mut f64, c: &mut f64, x: f64) {
            let t = *sum + x;
            if sum.abs() >= x.abs() {
                *c += (*sum - t) + x;
            } else {
                *c += (x - t) + *sum;
            }
            *sum = t;
        }
        step(&mut self.re, &mut self.re_c, z.re);
        step(&mut self.im, &mut self.im_c, z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// `Σ_{k≥1} z^k/(k·k!)` with the sum of term moduli.
fn series_part(z: Complex64) -> (Complex64, f64) {
    let mut acc = CompensatedSum::default();
    let mut pow = z; // z^k / k!
    let mut abs_sum = 0.0;
    let az = z.norm();
    for k in 1..2000u32 {
        let kf = k as f64;
        if k > 1 {
            pow = pow * z / kf;
        }
        let term = pow / kf;
        acc.add(term);
        let at = term.norm();
        abs_sum += at;
        if kf > az && at <= EPS * 1e-3 * acc.value().norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (acc.value(), abs_sum)
}

fn ei_series(z: Complex64) -> EiValue {
    let (s, abs_sum) = series_part(z);
    let on_negative_axis = z.im == 0.0 && z.re < 0.0;
    let log = if on_negative_axis { Complex64::new(z.norm().ln(), 0.0) } else { z.ln() };
    let mut acc = CompensatedSum::default();
    acc.add(Complex64::new(EULER_GAMMA, 0.0));
    acc.add(log);
    acc.add(s);
    let value = acc.value();
    let est_error = 8.0 * EPS * (abs_sum + log.norm() + EULER_GAMMA + value.norm());
    EiValue {
        value,
        regime: if on_negative_axis { EiRegime::PvReal } else { EiRegime::Series },
        est_error,
    }
}

/// `e^{w}·E₁(w)` by the modified Lentz algorithm on
/// `1/(w+1− 1²/(w+3− 2²/(w+5− …)))`, returning the value and the last relative update.
fn e1_scaled_cf(w: Complex64) -> (Complex64, f64, u32) {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = w + 1.0;
    let mut c = Complex64::new(1.0 / 1e-300, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    let mut last = 1.0;
    for i in 1..20_000u32 {
        let an = -((i as f64) * (i as f64));
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = Complex64::new(1.0, 0.0) / d;
        let del = c * d;
        h *= del;
        last = (del - 1.0).norm();
        if last < EPS * 0.5 {
            return (h, last, i);
        }
    }
    (h, last, 20_000)
}

fn ei_continued_fraction(z: Complex64) -> EiValue {
    let w = -z;
    let (scaled, last, iters) = e1_scaled_cf(w);
    let e1 = scaled * (-w).exp();
    let on_negative_axis = z.im == 0.0 && z.re < 0.0;
    let value = -e1 + Complex64::new(0.0, std::f64::consts::PI * sgn0(z.im));
    let est_error =
        e1.norm() * (8.0 * EPS * (1.0 + (iters as f64).sqrt()) + 4.0 * last) + 4.0 * EPS * value.norm();
    EiValue {
        value,
        regime: if on_negative_axis { EiRegime::PvReal } else { EiRegime::ContinuedFraction },
        est_error,
    }
}

/// `Σ k!/z^k` truncated at the smallest term, with the first omitted term's modulus.
fn asymptotic_sum(z: Complex64) -> (Complex64, f64) {
    let mut acc = CompensatedSum::default();
    let mut term = Complex64::new(1.0, 0.0);
    let az = z.norm();
    let mut k = 0u32;
    loop {
        acc.add(term);
        let next = term * ((k + 1) as f64) / z;
        if next.norm() >= term.norm() || next.norm() <= EPS * 1e-3 || (k as f64) > az {
            return (acc.value(), next.norm().min(term.norm()));
        }
        term = next;
        k += 1;
    }
}

/// The factor `S(z) = Σ k!/z^k` in `Ei(z) ≈ e^z/z·S(z) + iπ·sgn(Im z)`.
pub fn asymptotic_factor(z: Complex64) -> Complex64 {
    asymptotic_sum(z).0
}

fn ei_asymptotic_scaled(z: Complex64) -> (Scaled, f64) {
    let (s, tail) = asymptotic_sum(z);
    let exponent = if z.re > 0.0 { z.re } else { 0.0 };
    let rot = Complex64::from_polar((z.re - exponent).exp(), z.im);
    let stokes = if z.im == 0.0 { 0.0 } else { std::f64::consts::PI * sgn0(z.im) };
    let mantissa = rot * s / z + Complex64::new(0.0, stokes * (-exponent).exp());
    let rel_err = tail + 8.0 * EPS;
    (Scaled { mantissa, exponent }, rel_err * (rot / z).norm() + 4.0 * EPS * mantissa.norm())
}

/// Principal-branch `Ei(z)`; the principal value on the negative real axis.
pub fn ei(z: Complex64) -> Result<EiValue> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain("Ei has a logarithmic singularity at 0".into()));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    let az = z.norm();
    if az > ASYMPTOTIC_RADIUS {
        let (sc, err_m) = ei_asymptotic_scaled(z);
        let scale = sc.exponent.exp();
        let on_negative_axis = z.im == 0.0 && z.re < 0.0;
        return Ok(EiValue {
            value: sc.mantissa * scale,
            regime: if on_negative_axis { EiRegime::PvReal } else { EiRegime::Asymptotic },
            est_error: err_m * scale,
        });
    }
    if az <= 2.0 || az - z.re <= SERIES_CANCELLATION {
        Ok(ei_series(z))
    } else {
        Ok(ei_continued_fraction(z))
    }
}

/// `Ei(z)` split as `mantissa·e^{exponent}` so that large `Re z` does not overflow.
pub fn ei_scaled(z: Complex64) -> Result<Scaled> {
    if z.norm() > ASYMPTOTIC_RADIUS && z.re > 0.0 {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::Domain("Ei has a logarithmic singularity at 0".into()));
        }
        Ok(ei_asymptotic_scaled(z).0)
    } else {
        Ok(Scaled { mantissa: ei(z)?.value, exponent: 0.0 })
    }
}

/// `d/dt Ei(λt) = e^{λt}/t`.
pub fn ei_derivative(lambda: Complex64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("ei_derivative needs t > 0, got {t}")));
    }
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return Err(Error::Domain("λt = 0".into()));
    }
    Ok((lambda * t).exp() / t)
}

/// `d/dt arg Ei(λt) = Im(e^{λt}/(t·Ei(λt)))`, evaluated without overflow.
pub fn ei_arg_rate(lambda: Complex64, t: f64) -> Result<f64> {
    let sc = ei_scaled(lambda * t)?;
    let num = Complex64::from_polar((lambda.re * t - sc.exponent).exp(), lambda.im * t);
    Ok((num / (sc.mantissa * t)).im)
}

/// Closed rectangle `[re_lo, re_hi] × i[im_lo, im_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl LambdaBox {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        Self { re_lo, re_hi, im_lo, im_hi }
    }

    /// Degenerate box holding a single point.
    pub fn point(l: Complex64) -> Self {
        Self::new(l.re, l.re, l.im, l.im)
    }

    pub fn contains_zero(&self) -> bool {
        self.re_lo <= 0.0 && 0.0 <= self.re_hi && self.im_lo <= 0.0 && 0.0 <= self.im_hi
    }

    /// `n × n` grid (collapsed along degenerate sides).
    pub fn grid(&self, n: usize) -> Vec<Complex64> {
        let axis = |lo: f64, hi: f64| -> Vec<f64> {
            if hi <= lo || n < 2 {
                vec![lo]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        };
        let mut out = Vec::new();
        for re in axis(self.re_lo, self.re_hi) {
            for im in axis(self.im_lo, self.im_hi) {
                out.push(Complex64::new(re, im));
            }
        }
        out
    }
}

/// Parameters of the threshold search.
#[derive(Clone, Copy, Debug)]
pub struct T0Search {
    pub grid_per_side: usize,
    pub t_min: f64,
    pub t_cap: f64,
    pub samples_per_decade: usize,
    pub safety_factor: f64,
}

impl Default for T0Search {
    fn default() -> Self {
        Self { grid_per_side: 9, t_min: 1e-3, t_cap: 1e3, samples_per_decade: 400, safety_factor: 1.1 }
    }
}

fn t0_conditions_hold(lambda: Complex64, t: f64, eps: f64) -> Result<bool> {
    let sc = ei_scaled(lambda * t)?;
    let log_abs = sc.mantissa.norm().ln() + sc.exponent;
    if !(log_abs > eps.ln()) {
        return Ok(false);
    }
    if lambda.im != 0.0 {
        let rate = ei_arg_rate(lambda, t)?;
        if !(rate * lambda.im.signum() > 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Threshold for a single `λ`: first grid time after the last failure.
pub fn t0_single(lambda: Complex64, eps: f64, opts: &T0Search) -> Result<f64> {
    let decades = (opts.t_cap / opts.t_min).log10();
    let n = (decades * opts.samples_per_decade as f64).ceil() as usize + 1;
    let ratio = (opts.t_cap / opts.t_min).powf(1.0 / (n - 1) as f64);
    let mut last_fail: Option<usize> = None;
    let mut t = opts.t_min;
    for i in 0..n {
        if !t0_conditions_hold(lambda, t, eps)? {
            last_fail = Some(i);
        }
        t *= ratio;
    }
    match last_fail {
        None => Ok(opts.t_min),
        Some(i) if i + 1 >= n => Err(Error::NoThreshold(format!(
            "conditions still fail at t = {} for λ = {lambda}",
            opts.t_cap
        ))),
        Some(i) => Ok(opts.t_min * ratio.powi(i as i32 + 1)),
    }
}

/// Uniform `T₀` over a box of `λ`: `|Ei(λt)| > ε` and, for `Im λ ≠ 0`, the
/// argument of `Ei(λt)` moves monotonically in the direction of `Im λ`, for
/// every grid `λ` and every `t ≥ T₀`.
pub fn find_t0(lambda_box: &LambdaBox, eps: f64) -> Result<f64> {
    find_t0_with(lambda_box, eps, &T0Search::default())
}

pub fn find_t0_with(lambda_box: &LambdaBox, eps: f64, opts: &T0Search) -> Result<f64> {
    if lambda_box.contains_zero() {
        return Err(Error::Domain("λ box contains 0".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let mut worst: f64 = 0.0;
    for l in lambda_box.grid(opts.grid_per_side) {
        worst = worst.max(t0_single(l, eps, opts)?);
    }
    Ok(worst * opts.safety_factor)
}
