//! Scalar fields used by every vector and operator.
//!
//! Two numeric modes exist. [`Exact`] stores complex numbers as pairs of
//! arbitrary precision rationals; every comparison is decided exactly.
//! [`Float`] stores `Complex64` and evaluates strict inequalities `a < b`
//! as `a < b - TOL_EQ`.
//!
//! Norms are not closed over the rationals (`|3 + i|` is irrational), so the
//! exact mode carries norms as [`ExactNorm`]: a rational plus a sum of square
//! roots of rationals. Comparisons against a rational bound refine dyadic
//! enclosures until they separate, which always happens because a sum of
//! positive irrational square roots is never rational.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance subtracted from strict upper bounds in [`NumericMode::Float`].
pub const TOL_EQ: f64 = 1e-9;

/// Exact complex rational scalar.
pub type Exact = Complex<BigRational>;
/// Double precision complex scalar.
pub type Float = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    #[serde(alias = "exact-rational")]
    Exact,
    #[serde(alias = "float64")]
    Float,
}

impl std::str::FromStr for NumericMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-rational" => Ok(NumericMode::Exact),
            "float" | "float64" => Ok(NumericMode::Float),
            other => Err(Error::Config(format!("unknown numeric mode `{other}`"))),
        }
    }
}

/// Real numbers of a mode: radii, bounds, scale factors.
pub trait Real:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(r: &BigRational) -> Self;
    /// Exact dyadic conversion in the exact mode.
    fn from_f64(x: f64) -> Self;
    fn from_int(n: i64) -> Self {
        Self::from_ratio(&BigRational::from_integer(BigInt::from(n)))
    }
    fn to_f64(&self) -> f64;
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    /// `a < b` under the mode's strictness policy.
    fn strictly_below(a: &Self, b: &Self) -> bool;
    fn powi(&self, n: i32) -> Self {
        let mut acc = Self::one();
        let base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        for _ in 0..n.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }
    fn to_json(&self) -> serde_json::Value;
}

/// Non-negative magnitudes (norms and distances).
pub trait Magnitude: Clone + Debug + Send + Sync + 'static {
    type Real: Real;

    fn zero() -> Self;
    fn from_real(r: &Self::Real) -> Self;
    fn sqrt_of(r: &Self::Real) -> Self;
    fn sum_sqrt<'a, I>(squares: I) -> Self
    where
        I: IntoIterator<Item = &'a Self::Real>;
    /// `self < bound` under the mode's strictness policy.
    fn lt(&self, bound: &Self::Real) -> bool;
    /// `self <= bound`; the float mode allows `TOL_EQ` slack.
    fn le(&self, bound: &Self::Real) -> bool;
    fn scale(&self, factor: &Self::Real) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// Exact equality in the exact mode; relative `1e-9` in the float mode.
    fn same_as(&self, other: &Self) -> bool;
    fn to_json(&self) -> serde_json::Value;
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Real: Real;
    type Norm: Magnitude<Real = Self::Real>;
    const MODE: NumericMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_real(r: Self::Real) -> Self;
    fn from_parts(re: &BigRational, im: &BigRational) -> Self;
    fn scale(&self, r: &Self::Real) -> Self;
    fn powu(&self, n: u64) -> Self;
    /// `|z|^2`.
    fn abs_sq(&self) -> Self::Real;
    /// `Re(self * conj(other))`.
    fn re_inner(&self, other: &Self) -> Self::Real;
    fn to_c64(&self) -> Complex64;
    /// `log2 |z|`, `-inf` for zero.
    fn log2_abs(&self) -> f64;
    fn to_json_parts(&self) -> (serde_json::Value, serde_json::Value);
    fn is_real(&self) -> bool;
    fn re_part(&self) -> Self::Real;

    fn modulus(&self) -> Self::Norm {
        Self::Norm::sqrt_of(&self.abs_sq())
    }
}

// ---------------------------------------------------------------------------
// rational helpers

pub fn ratio_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p/q` rendering, always with an explicit denominator.
pub fn ratio_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, integers, and finite decimals such as `-0.375` or `1e-3`.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(joined.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    if exponent.abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    value = if scale >= 0 { value * pow } else { value / pow };
    Ok(if negative { -value } else { value })
}

/// `log2 |r|` from the bit lengths, accurate to double precision.
pub fn log2_ratio(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

fn log2_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    match ToPrimitive::to_f64(r) {
        Some(v) if v.is_finite() => v,
        _ => {
            let l = log2_ratio(r);
            let v = l.exp2();
            if r.is_negative() {
                -v
            } else {
                v
            }
        }
    }
}

fn ratio_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn ratio_pow(base: &BigRational, n: u64) -> BigRational {
    num_traits::pow(base.clone(), n as usize)
}

/// Exact square root when `r` is the square of a rational.
fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Real impls

impl Real for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_f64(x: f64) -> Self {
        ratio_from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn strictly_below(a: &Self, b: &Self) -> bool {
        a < b
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(ratio_to_string(self))
    }
}

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn strictly_below(a: &Self, b: &Self) -> bool {
        *a < *b - TOL_EQ
    }
    fn to_json(&self) -> serde_json::Value {
        json_f64(*self)
    }
}

pub(crate) fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(format!("{x}")))
}

// ---------------------------------------------------------------------------
// Exact norms

/// `rational + sum(sqrt(root))` with every root a positive non-square rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactNorm {
    rational: BigRational,
    roots: Vec<BigRational>,
}

impl ExactNorm {
    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn is_rational(&self) -> bool {
        self.roots.is_empty()
    }

    fn push_sqrt(&mut self, q: &BigRational) {
        if q.is_zero() {
            return;
        }
        match exact_sqrt(q) {
            Some(s) => self.rational += s,
            None => self.roots.push(q.clone()),
        }
    }

    /// Dyadic enclosure `[lo, hi]` of the value at `bits` of precision.
    fn enclosure(&self, bits: u64) -> (BigRational, BigRational) {
        let mut lo = self.rational.clone();
        let mut hi = self.rational.clone();
        let scale = BigInt::one() << bits;
        for q in &self.roots {
            // sqrt(n/d) = sqrt(n*d)/d
            let nd = q.numer() * q.denom() * (&scale * &scale);
            let s = nd.sqrt();
            let den = q.denom() * &scale;
            lo += BigRational::new(s.clone(), den.clone());
            hi += BigRational::new(s + 1, den);
        }
        (lo, hi)
    }

    /// Three-way comparison with a rational bound.
    fn compare(&self, bound: &BigRational) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        if self.roots.is_empty() {
            return self.rational.cmp(bound);
        }
        if self.rational.is_zero() && self.roots.len() == 1 {
            if !Signed::is_positive(bound) {
                return Ordering::Greater;
            }
            return self.roots[0].cmp(&(bound * bound));
        }
        let mut bits = 32;
        loop {
            let (lo, hi) = self.enclosure(bits);
            if &hi < bound {
                return Ordering::Less;
            }
            if &lo > bound {
                return Ordering::Greater;
            }
            if bits > 1 << 16 {
                // Unreachable for irrational sums; keep the order of the midpoint.
                let mid = (lo + hi) / ratio_int(2);
                return mid.cmp(bound);
            }
            bits *= 2;
        }
    }
}

impl Magnitude for ExactNorm {
    type Real = BigRational;

    fn zero() -> Self {
        ExactNorm { rational: Zero::zero(), roots: Vec::new() }
    }
    fn from_real(r: &BigRational) -> Self {
        ExactNorm { rational: r.clone(), roots: Vec::new() }
    }
    fn sqrt_of(r: &BigRational) -> Self {
        let mut n = Self::zero();
        n.push_sqrt(r);
        n
    }
    fn sum_sqrt<'a, I>(squares: I) -> Self
    where
        I: IntoIterator<Item = &'a BigRational>,
    {
        let mut n = Self::zero();
        for q in squares {
            n.push_sqrt(q);
        }
        n
    }
    fn lt(&self, bound: &BigRational) -> bool {
        self.compare(bound) == std::cmp::Ordering::Less
    }
    fn le(&self, bound: &BigRational) -> bool {
        self.compare(bound) != std::cmp::Ordering::Greater
    }
    fn scale(&self, factor: &BigRational) -> Self {
        let f2 = factor * factor;
        ExactNorm {
            rational: &self.rational * factor,
            roots: if factor.is_zero() {
                Vec::new()
            } else {
                self.roots.iter().map(|q| q * &f2).collect()
            },
        }
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rational) + self.roots.iter().map(|q| ratio_to_f64(q).sqrt()).sum::<f64>()
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.roots.is_empty()
    }
    fn same_as(&self, other: &Self) -> bool {
        if self.roots.is_empty() && other.roots.is_empty() {
            return self.rational == other.rational;
        }
        let mut a = self.roots.clone();
        let mut b = other.roots.clone();
        a.sort();
        b.sort();
        self.rational == other.rational && a == b
    }
    fn to_json(&self) -> serde_json::Value {
        let mut exact = ratio_to_string(&self.rational);
        for q in &self.roots {
            exact.push_str(&format!(" + sqrt({})", ratio_to_string(q)));
        }
        serde_json::json!({ "approx": json_f64(self.to_f64()), "exact": exact })
    }
}

impl Magnitude for f64 {
    type Real = f64;

    fn zero() -> Self {
        0.0
    }
    fn from_real(r: &f64) -> Self {
        *r
    }
    fn sqrt_of(r: &f64) -> Self {
        r.max(0.0).sqrt()
    }
    fn sum_sqrt<'a, I>(squares: I) -> Self
    where
        I: IntoIterator<Item = &'a f64>,
    {
        squares.into_iter().map(|q| q.max(0.0).sqrt()).sum()
    }
    fn lt(&self, bound: &f64) -> bool {
        *self < *bound - TOL_EQ
    }
    fn le(&self, bound: &f64) -> bool {
        *self <= *bound + TOL_EQ
    }
    fn scale(&self, factor: &f64) -> Self {
        self * factor
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn same_as(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-9 * self.abs().max(other.abs()).max(1e-300)
    }
    fn to_json(&self) -> serde_json::Value {
        json_f64(*self)
    }
}

// ---------------------------------------------------------------------------
// Scalar impls

impl Scalar for Exact {
    type Real = BigRational;
    type Norm = ExactNorm;
    const MODE: NumericMode = NumericMode::Exact;

    fn zero() -> Self {
        Complex::new(Zero::zero(), Zero::zero())
    }
    fn one() -> Self {
        Complex::new(One::one(), Zero::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_real(r: BigRational) -> Self {
        Complex::new(r, Zero::zero())
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }
    fn scale(&self, r: &BigRational) -> Self {
        Complex::new(&self.re * r, &self.im * r)
    }
    fn powu(&self, n: u64) -> Self {
        if self.im.is_zero() {
            return Complex::new(ratio_pow(&self.re, n), Zero::zero());
        }
        let mut acc = <Exact as Scalar>::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
    fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
    fn re_inner(&self, other: &Self) -> BigRational {
        &self.re * &other.re + &self.im * &other.im
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
    fn log2_abs(&self) -> f64 {
        if self.im.is_zero() {
            return log2_ratio(&self.re);
        }
        if self.re.is_zero() {
            return log2_ratio(&self.im);
        }
        let a = log2_ratio(&self.re);
        let b = log2_ratio(&self.im);
        let m = a.max(b);
        m + 0.5 * ((2.0 * (a - m)).exp2() + (2.0 * (b - m)).exp2()).log2()
    }
    fn to_json_parts(&self) -> (serde_json::Value, serde_json::Value) {
        (
            serde_json::Value::String(ratio_to_string(&self.re)),
            serde_json::Value::String(ratio_to_string(&self.im)),
        )
    }
    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    fn re_part(&self) -> BigRational {
        self.re.clone()
    }
}

impl Scalar for Float {
    type Real = f64;
    type Norm = f64;
    const MODE: NumericMode = NumericMode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(ratio_to_f64(re), ratio_to_f64(im))
    }
    fn scale(&self, r: &f64) -> Self {
        self * r
    }
    fn powu(&self, n: u64) -> Self {
        if self.im == 0.0 {
            return Complex64::new(self.re.powf(n as f64), 0.0);
        }
        self.powf(n as f64)
    }
    fn abs_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn re_inner(&self, other: &Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn log2_abs(&self) -> f64 {
        self.norm().log2()
    }
    fn to_json_parts(&self) -> (serde_json::Value, serde_json::Value) {
        (json_f64(self.re), json_f64(self.im))
    }
    fn is_real(&self) -> bool {
        self.im == 0.0
    }
    fn re_part(&self) -> f64 {
        self.re
    }
}

/// Parses a scalar from JSON: a number, a rational string, or `[re, im]`.
pub fn parse_scalar_json<S: Scalar>(v: &serde_json::Value) -> Result<S> {
    let (re, im) = parse_complex_json(v)?;
    Ok(S::from_parts(&re, &im))
}

pub fn parse_real_json(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::Number(n) => parse_ratio(&n.to_string()),
        serde_json::Value::String(s) => parse_ratio(s),
        other => Err(Error::Parse(format!("expected a real number, got {other}"))),
    }
}

pub fn parse_complex_json(v: &serde_json::Value) -> Result<(BigRational, BigRational)> {
    match v {
        serde_json::Value::Array(parts) if parts.len() == 2 => {
            Ok((parse_real_json(&parts[0])?, parse_real_json(&parts[1])?))
        }
        other => Ok((parse_real_json(other)?, Zero::zero())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_ratio("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_ratio("-0.375").unwrap(), ratio(-3, 8));
        assert_eq!(parse_ratio("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_ratio("12").unwrap(), ratio_int(12));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio(".").is_err());
    }

    #[test]
    fn exact_norm_perfect_squares_stay_rational() {
        let n = ExactNorm::sqrt_of(&ratio(25, 4));
        assert!(n.is_rational());
        assert_eq!(n.rational_part(), &ratio(5, 2));
    }

    #[test]
    fn exact_norm_compares_sums_of_roots() {
        // sqrt(2) + sqrt(3) ~ 3.1463
        let n = ExactNorm::sum_sqrt([ratio_int(2), ratio_int(3)].iter());
        assert!(n.lt(&ratio(3147, 1000)));
        assert!(!n.lt(&ratio(3146, 1000)));
        // sqrt(2) < 1.4143, > 1.4142
        let r = ExactNorm::sqrt_of(&ratio_int(2));
        assert!(r.lt(&ratio(14143, 10000)));
        assert!(!r.lt(&ratio(14142, 10000)));
        assert!(!r.lt(&ratio_int(0)));
    }

    #[test]
    fn float_strictness_subtracts_tolerance() {
        assert!(!Magnitude::lt(&1.0f64, &1.0));
        assert!(!Magnitude::lt(&(1.0 - 1e-12), &1.0));
        assert!(Magnitude::lt(&(1.0 - 1e-6), &1.0));
    }

    #[test]
    fn log2_of_huge_rationals() {
        let big = num_traits::pow(ratio_int(2), 5000);
        assert!((log2_ratio(&big) - 5000.0).abs() < 1e-9);
        let tiny = ratio_int(1) / big;
        assert!((log2_ratio(&tiny) + 5000.0).abs() < 1e-9);
        let z: Exact = Complex::new(ratio_int(3), ratio_int(4));
        assert!((z.log2_abs() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn complex_powers_match_repeated_products() {
        let z: Exact = Complex::new(ratio(1, 2), ratio(1, 3));
        let mut acc = <Exact as Scalar>::one();
        for _ in 0..7 {
            acc *= z.clone();
        }
        assert_eq!(z.powu(7), acc);
    }
}
