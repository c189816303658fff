//! Integer polynomials and exact characteristic polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SpectralInterval};

/// Polynomial with big-integer coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    /// Builds a polynomial, trimming high zero coefficients. The zero
    /// polynomial is rejected since its leading coefficient is undefined.
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        let p = IntPolynomial { coeffs: trim(coeffs) };
        if p.coeffs.is_empty() {
            return Err(Error::Domain("zero polynomial".into()));
        }
        Ok(p)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect()).expect("nonzero polynomial")
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    /// Exact value at the rational equal to the f64 `x`.
    pub fn eval_at_f64(&self, x: f64) -> BigRational {
        self.eval_rational(&BigRational::from_float(x).expect("finite evaluation point"))
    }

    pub fn derivative(&self) -> Option<IntPolynomial> {
        let d: Vec<BigInt> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        IntPolynomial::new(d).ok()
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`,
    /// by Sturm's theorem. Neither endpoint may be a root.
    pub fn distinct_roots_between(&self, lo: &BigRational, hi: &BigRational) -> usize {
        let chain = sturm_chain(self);
        let v_lo = sign_changes(&chain, lo);
        let v_hi = sign_changes(&chain, hi);
        v_lo.saturating_sub(v_hi)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        IntPolynomial::new(coeffs).map_err(D::Error::custom)
    }
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

// Dense Z[x] helpers, constant term first, zero polynomial = empty vec.

fn pmul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn psub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero))
            .collect(),
    )
}

/// Exact quotient `a / b` for a monic `b` that divides `a`.
fn pdiv_exact_monic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(b.last().is_some_and(One::is_one), "divisor must be monic");
    if a.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    if a.len() <= db {
        assert!(a.is_empty(), "inexact polynomial division");
        return Vec::new();
    }
    let mut rem = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = rem[k + db].clone();
        if c.is_zero() {
            continue;
        }
        for (i, bi) in b.iter().enumerate() {
            rem[k + i] -= &c * bi;
        }
        q[k] = c;
    }
    assert!(rem.iter().all(Zero::is_zero), "inexact polynomial division");
    trim(q)
}

/// Characteristic polynomial `det(xI - m)` by Bareiss elimination over Z[x].
///
/// Every pivot is a leading principal minor of `xI - m`, i.e. the monic
/// characteristic polynomial of a leading principal submatrix, so no row
/// exchanges are needed and every division is exact by a monic divisor.
pub fn char_poly(m: &Matrix) -> Result<IntPolynomial> {
    if !m.is_square() {
        return Err(Error::Shape("characteristic polynomial of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let v = m.get(i, j).as_integer().ok_or_else(|| {
                Error::Domain(format!("entry ({}, {}) = {} is not an integer", i + 1, j + 1, m.get(i, j)))
            })?;
            let entry = if i == j {
                vec![-v, BigInt::one()]
            } else {
                vec![-v]
            };
            row.push(trim(entry));
        }
        a.push(row);
    }
    let mut prev = vec![BigInt::one()];
    for k in 0..n.saturating_sub(1) {
        for i in k + 1..n {
            for j in k + 1..n {
                let num = psub(&pmul(&a[k][k], &a[i][j]), &pmul(&a[i][k], &a[k][j]));
                a[i][j] = pdiv_exact_monic(&num, &prev);
            }
        }
        prev = a[k][k].clone();
    }
    IntPolynomial::new(a[n - 1][n - 1].clone())
}

// Sturm chain over Q.

type QPoly = Vec<BigRational>;

fn qtrim(mut v: QPoly) -> QPoly {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn qrem(a: &QPoly, b: &QPoly) -> QPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r.last().expect("non-empty") / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] = &r[k + i] - &c * bi;
        }
        r.pop();
        r = qtrim(r);
    }
    r
}

fn sturm_chain(p: &IntPolynomial) -> Vec<QPoly> {
    let to_q = |c: &[BigInt]| -> QPoly {
        c.iter().map(|x| BigRational::from_integer(x.clone())).collect()
    };
    let mut chain = vec![to_q(p.coefficients())];
    if let Some(d) = p.derivative() {
        chain.push(to_q(d.coefficients()));
    }
    while chain.len() >= 2 {
        let n = chain.len();
        let r = qrem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[QPoly], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for p in chain {
        let v = p
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// How a characteristic polynomial certifies that an interval contains a root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootBracket {
    /// The polynomial vanishes exactly at an endpoint.
    RootAtEndpoint { at: String },
    /// The polynomial takes opposite signs at the endpoints.
    SignChange,
    /// No sign change, but a Sturm count finds this many distinct roots strictly inside.
    SturmCount { roots: usize },
    /// Nothing certifies a root in the interval.
    Unverified,
}

impl RootBracket {
    pub fn is_certified(&self) -> bool {
        !matches!(self, RootBracket::Unverified)
    }
}

/// Checks that `poly` has a real root in `[interval.lo, interval.hi]`,
/// evaluating exactly at the f64 endpoints.
pub fn bracket_root(poly: &IntPolynomial, interval: &SpectralInterval) -> RootBracket {
    let lo = BigRational::from_float(interval.lo).expect("finite endpoint");
    let hi = BigRational::from_float(interval.hi).expect("finite endpoint");
    let p_lo = poly.eval_rational(&lo);
    let p_hi = poly.eval_rational(&hi);
    if p_lo.is_zero() {
        return RootBracket::RootAtEndpoint { at: interval.lo.to_string() };
    }
    if p_hi.is_zero() {
        return RootBracket::RootAtEndpoint { at: interval.hi.to_string() };
    }
    if p_lo.is_positive() != p_hi.is_positive() {
        return RootBracket::SignChange;
    }
    match poly.distinct_roots_between(&lo, &hi) {
        0 => RootBracket::Unverified,
        roots => RootBracket::SturmCount { roots },
    }
}
