//! Scalars in one of two representations: exact rationals or signed
//! log-domain floats.
//!
//! The representation is fixed per run. Arithmetic between an exact and a
//! log-domain value is a programming error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Signed magnitude stored as its natural logarithm. Zero has `sign == 0`.
#[derive(Debug, Clone, Copy)]
pub struct LogFloat {
    sign: i8,
    ln: f64,
}

impl LogFloat {
    pub const ZERO: LogFloat = LogFloat { sign: 0, ln: 0.0 };
    pub const ONE: LogFloat = LogFloat { sign: 1, ln: 0.0 };

    pub fn from_parts(sign: i8, ln: f64) -> Self {
        if sign == 0 || ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        assert!(!ln.is_nan(), "log magnitude must not be NaN");
        LogFloat {
            sign: sign.signum(),
            ln: if ln == 0.0 { 0.0 } else { ln },
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value {x}");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_parts(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::ZERO;
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        Self::from_parts(sign, ln_bigint(r.numer()) - ln_bigint(r.denom()))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln
        }
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.ln.exp()
    }

    fn abs(self) -> Self {
        LogFloat {
            sign: self.sign.abs(),
            ln: self.ln,
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln.total_cmp(&other.ln),
                _ => other.ln.total_cmp(&self.ln),
            },
            o => o,
        }
    }
}

impl Add for LogFloat {
    type Output = LogFloat;
    fn add(self, rhs: LogFloat) -> LogFloat {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.ln >= rhs.ln { (self, rhs) } else { (rhs, self) };
        let d = small.ln - big.ln;
        if big.sign == small.sign {
            LogFloat::from_parts(big.sign, big.ln + d.exp().ln_1p())
        } else if d == 0.0 {
            LogFloat::ZERO
        } else {
            // d < 0, so -expm1(d) lies in (0, 1)
            LogFloat::from_parts(big.sign, big.ln + (-d.exp_m1()).ln())
        }
    }
}

impl Mul for LogFloat {
    type Output = LogFloat;
    fn mul(self, rhs: LogFloat) -> LogFloat {
        if self.is_zero() || rhs.is_zero() {
            return LogFloat::ZERO;
        }
        LogFloat::from_parts(self.sign * rhs.sign, self.ln + rhs.ln)
    }
}

impl Div for LogFloat {
    type Output = LogFloat;
    fn div(self, rhs: LogFloat) -> LogFloat {
        assert!(!rhs.is_zero(), "division by zero");
        if self.is_zero() {
            return LogFloat::ZERO;
        }
        LogFloat::from_parts(self.sign * rhs.sign, self.ln - rhs.ln)
    }
}

impl Neg for LogFloat {
    type Output = LogFloat;
    fn neg(self) -> LogFloat {
        LogFloat {
            sign: -self.sign,
            ln: self.ln,
        }
    }
}

/// ln |x| for a big integer, without overflowing through f64.
pub fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

/// An exact rational or a log-domain float.
#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Float(LogFloat),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::zero()),
            Mode::Float => Scalar::Float(LogFloat::ZERO),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::one()),
            Mode::Float => Scalar::Float(LogFloat::ONE),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Scalar::Exact(BigRational::from_integer(v))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn to_mode(&self, mode: Mode) -> Scalar {
        match (self, mode) {
            (Scalar::Exact(r), Mode::Float) => Scalar::Float(LogFloat::from_rational(r)),
            (Scalar::Float(f), Mode::Exact) => {
                let r = BigRational::from_float(f.to_f64())
                    .expect("log-domain value too large to convert to a rational");
                Scalar::Exact(r)
            }
            _ => self.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => f.is_zero(),
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            Scalar::Exact(r) => match r.numer().sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
            Scalar::Float(f) => f.sign(),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    /// Natural log of |x|, `-inf` for zero. Exact values never overflow here.
    pub fn ln_abs(&self) -> f64 {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    ln_bigint(r.numer()) - ln_bigint(r.denom())
                }
            }
            Scalar::Float(f) => f.ln_abs(),
        }
    }

    /// Nearest f64; may be infinite for astronomically large values.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => match r.to_f64() {
                Some(v) if v.is_finite() && (v != 0.0 || r.is_zero()) => v,
                _ => f64::from(self.signum()) * self.ln_abs().exp(),
            },
            Scalar::Float(f) => f.to_f64(),
        }
    }

    /// `|x|^(1/k)` as an f64, computed through logarithms.
    pub fn root_f64(&self, k: usize) -> f64 {
        assert!(k > 0);
        if self.is_zero() {
            0.0
        } else {
            (self.ln_abs() / k as f64).exp()
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(self.mode());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Parses a decimal integer or a `p/q` rational literal.
    pub fn parse_literal(text: &str) -> Result<Scalar> {
        let t = text.trim();
        let bad = || Error::parse(format!("literal {t:?}"), "expected a decimal integer or p/q");
        if t.is_empty() {
            return Err(bad());
        }
        let (num, den) = match t.split_once('/') {
            Some((p, q)) => (p, Some(q)),
            None => (t, None),
        };
        let is_int = |s: &str| {
            let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !is_int(num) || den.is_some_and(|q| !is_int(q)) {
            return Err(bad());
        }
        let p = BigInt::from_str(num).map_err(|_| bad())?;
        let q = match den {
            Some(q) => BigInt::from_str(q).map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if q.is_zero() {
            return Err(Error::parse(format!("literal {t:?}"), "zero denominator"));
        }
        Ok(Scalar::Exact(BigRational::new(p, q)))
    }

    fn expect_same(&self, other: &Scalar) -> Mode {
        let m = self.mode();
        assert_eq!(m, other.mode(), "mixed exact and log-domain arithmetic");
        m
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(v) => {
                if v.is_zero() {
                    return write!(f, "0");
                }
                let sign = if v.sign() < 0 { "-" } else { "" };
                let log10 = v.ln_abs() / std::f64::consts::LN_10;
                if log10.abs() < 15.0 {
                    write!(f, "{sign}{}", v.to_f64().abs())
                } else {
                    let exp = log10.floor();
                    let mantissa = 10f64.powf(log10 - exp);
                    write!(f, "{sign}{mantissa:.12}e{exp}")
                }
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.cmp_total(b),
            _ => panic!("mixed exact and log-domain comparison"),
        }
    }
}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Exact(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Scalar::Float(f) => {
                1u8.hash(state);
                f.sign.hash(state);
                if f.sign != 0 {
                    f.ln.to_bits().hash(state);
                }
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $closed_on_integers:expr) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.expect_same(rhs);
                match (self, rhs) {
                    // Integer operands skip the gcd reduction, which dominates for large values.
                    (Scalar::Exact(a), Scalar::Exact(b)) if $closed_on_integers && a.is_integer() && b.is_integer() => {
                        Scalar::Exact(BigRational::from_integer(a.numer().$method(b.numer())))
                    }
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.$method(b)),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a.$method(*b)),
                    _ => unreachable!(),
                }
            }
        }

        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, true);
binop!(Mul, mul, true);
binop!(Div, div, false);

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-*f),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lf(x: f64) -> LogFloat {
        LogFloat::from_f64(x)
    }

    #[test]
    fn literals() {
        assert_eq!(Scalar::parse_literal("3").unwrap(), Scalar::from_int(3));
        assert_eq!(Scalar::parse_literal("-6/4").unwrap(), Scalar::ratio(-3, 2));
        assert_eq!(Scalar::parse_literal("2/-4").unwrap(), Scalar::ratio(-1, 2));
        for bad in ["", "1.5", "x", "1/0", "/3", "3/", "1e5"] {
            assert!(Scalar::parse_literal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rationals_stay_reduced() {
        let Scalar::Exact(r) = Scalar::ratio(6, -8) else { unreachable!() };
        assert_eq!(*r.numer(), BigInt::from(-3));
        assert_eq!(*r.denom(), BigInt::from(4));
    }

    #[test]
    fn log_float_arithmetic() {
        let a = lf(3.0);
        let b = lf(-5.0);
        assert!(((a + b).to_f64() + 2.0).abs() < 1e-12);
        assert!(((a * b).to_f64() + 15.0).abs() < 1e-12);
        assert!(((b / a).to_f64() + 5.0 / 3.0).abs() < 1e-12);
        assert!((a + (-a)).is_zero());
        assert!((a * LogFloat::ZERO).is_zero());
        assert!(((LogFloat::ZERO + b).to_f64() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn log_float_handles_huge_values() {
        let big = LogFloat::from_parts(1, 5000.0);
        let sum = big + big;
        assert!((sum.ln_abs() - (5000.0 + std::f64::consts::LN_2)).abs() < 1e-9);
        let diff = big + (-big);
        assert!(diff.is_zero());
        let near = big + LogFloat::from_parts(-1, 4999.0);
        assert!(!near.ln_abs().is_nan());
    }

    #[test]
    fn ln_of_huge_exact_values() {
        let x = BigInt::from(3).pow(5000);
        let s = Scalar::from_bigint(x);
        assert!((s.ln_abs() - 5000.0 * 3f64.ln()).abs() < 1e-6);
        assert!((s.root_f64(5000) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mode_conversion() {
        let s = Scalar::ratio(7, 2).to_mode(Mode::Float);
        assert!((s.to_f64() - 3.5).abs() < 1e-12);
        assert!(Scalar::from_int(2).to_mode(Mode::Float) < s);
    }

    #[test]
    #[should_panic(expected = "mixed")]
    fn mixing_modes_panics() {
        let _ = Scalar::from_int(1) + Scalar::one(Mode::Float);
    }
}
