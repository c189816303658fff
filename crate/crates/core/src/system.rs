//! Bilinear systems `(*, s)`: `v = x * y` has `v_k = Σ c[k][i][j] x_i y_j`.
//!
//! Indices are 0-based in this API and 1-based in files and reports.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Mode, Scalar};

/// A vector of scalars, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn new(entries: Vec<Scalar>) -> Self {
        Vector(entries)
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Vector(v.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.0
    }

    pub fn max_entry(&self) -> Option<&Scalar> {
        self.0.iter().max()
    }

    /// `self <= other` in the product order.
    pub fn dominated_by(&self, other: &Vector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn to_mode(&self, mode: Mode) -> Vector {
        Vector(self.0.iter().map(|x| x.to_mode(mode)).collect())
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    /// All coefficients nonnegative and all start entries positive.
    NonnegPositiveStart,
    General,
}

/// One nonzero coefficient `c[k][i][j]` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub c: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct System {
    dim: usize,
    terms: Vec<Term>,
    start: Vector,
    sign_class: SignClass,
}

impl System {
    pub const ARITY: usize = 2;

    /// Validates and builds a system. Zero coefficients are dropped and
    /// duplicate index triples are rejected.
    pub fn new(dim: usize, start: Vector, terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if start.len() != dim {
            return Err(Error::Shape(format!(
                "start vector has {} entries, dimension is {dim}",
                start.len()
            )));
        }
        let mode = start[0].mode();
        let mut map: BTreeMap<(usize, usize, usize), Scalar> = BTreeMap::new();
        for t in terms {
            if t.k >= dim || t.i >= dim || t.j >= dim {
                return Err(Error::Domain(format!(
                    "coefficient index ({}, {}, {}) outside 1..={dim}",
                    t.k + 1,
                    t.i + 1,
                    t.j + 1
                )));
            }
            if map.insert((t.k, t.i, t.j), t.c).is_some() {
                return Err(Error::Domain(format!(
                    "duplicate coefficient ({}, {}, {})",
                    t.k + 1,
                    t.i + 1,
                    t.j + 1
                )));
            }
        }
        if start.entries().iter().chain(map.values()).any(|x| x.mode() != mode) {
            return Err(Error::Domain("system mixes exact and log-domain scalars".into()));
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((k, i, j), c)| Term { k, i, j, c })
            .collect();
        let nonneg = terms.iter().all(|t| t.c.is_positive())
            && start.entries().iter().all(Scalar::is_positive);
        let sign_class = if nonneg {
            SignClass::NonnegPositiveStart
        } else {
            SignClass::General
        };
        Ok(System { dim, terms, start, sign_class })
    }

    /// Builds an exact system from small integers with 1-based `(k, i, j, c)` terms.
    pub fn from_ints(start: &[i64], terms: &[(usize, usize, usize, i64)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|&(k, i, j, c)| {
                if k == 0 || i == 0 || j == 0 {
                    return Err(Error::Domain("indices are 1-based".into()));
                }
                Ok(Term { k: k - 1, i: i - 1, j: j - 1, c: Scalar::from_int(c) })
            })
            .collect::<Result<Vec<_>>>()?;
        System::new(start.len(), Vector::from_ints(start), terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        Self::ARITY
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn sign_class(&self) -> SignClass {
        self.sign_class
    }

    pub fn is_nonneg(&self) -> bool {
        self.sign_class == SignClass::NonnegPositiveStart
    }

    pub fn mode(&self) -> Mode {
        self.start[0].mode()
    }

    pub fn coefficient(&self, k: usize, i: usize, j: usize) -> Scalar {
        self.terms
            .binary_search_by(|t| (t.k, t.i, t.j).cmp(&(k, i, j)))
            .map(|idx| self.terms[idx].c.clone())
            .unwrap_or_else(|_| Scalar::zero(self.mode()))
    }

    pub fn to_mode(&self, mode: Mode) -> System {
        System {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term { c: t.c.to_mode(mode), ..t.clone() })
                .collect(),
            start: self.start.to_mode(mode),
            sign_class: self.sign_class,
        }
    }

    pub(crate) fn require_nonneg(&self, what: &str) -> Result<()> {
        if self.is_nonneg() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} requires nonnegative coefficients and a positive start vector; use brute force for general systems"
            )))
        }
    }

    fn check_len(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector of length {} for a system of dimension {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.combine(x, y))
    }

    /// `x * y` without length checks.
    pub(crate) fn combine(&self, x: &Vector, y: &Vector) -> Vector {
        let mode = self.mode();
        let mut out = vec![Scalar::zero(mode); self.dim];
        for t in &self.terms {
            let (a, b) = (&x[t.i], &y[t.j]);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            out[t.k] = &out[t.k] + &(&t.c * &(a * b));
        }
        Vector(out)
    }

    /// Matrix of `x ↦ x * y` (the right operand is fixed).
    pub fn left_slice(&self, y: &Vector) -> Result<Matrix> {
        self.check_len(y)?;
        let mut m = Matrix::zeros(self.dim, self.dim, self.mode());
        for t in &self.terms {
            let add = &t.c * &y[t.j];
            let cur = m.get(t.k, t.i).clone();
            m.set(t.k, t.i, &cur + &add);
        }
        Ok(m)
    }

    /// Matrix of `y ↦ x * y` (the left operand is fixed).
    pub fn right_slice(&self, x: &Vector) -> Result<Matrix> {
        self.check_len(x)?;
        let mut m = Matrix::zeros(self.dim, self.dim, self.mode());
        for t in &self.terms {
            let add = &t.c * &x[t.i];
            let cur = m.get(t.k, t.j).clone();
            m.set(t.k, t.j, &cur + &add);
        }
        Ok(m)
    }

    /// `max_k Σ_{i,j} c[k][i][j]`.
    pub fn coeff_row_sum_bound(&self) -> Result<Scalar> {
        self.require_nonneg("coefficient mass bound")?;
        let mut sums = vec![Scalar::zero(self.mode()); self.dim];
        for t in &self.terms {
            sums[t.k] = &sums[t.k] + &t.c;
        }
        Ok(sums.into_iter().max().expect("dim >= 1"))
    }

    /// Canonical JSON serialization (exact mode only).
    pub fn emit(&self) -> String {
        let file = SystemFile {
            dim: self.dim,
            arity: None,
            s: self.start.entries().iter().map(literal).collect(),
            coeffs: self
                .terms
                .iter()
                .map(|t| CoeffEntry {
                    k: t.k + 1,
                    i: t.i + 1,
                    j: t.j + 1,
                    c: literal(&t.c),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.emit().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn parse(text: &[u8]) -> Result<Self> {
        let file: SystemFile = serde_json::from_slice(text).map_err(|e| {
            Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        if let Some(a) = file.arity {
            if a != Self::ARITY {
                return Err(Error::parse("arity", format!("only arity 2 is supported, got {a}")));
            }
        }
        if file.dim == 0 {
            return Err(Error::parse("dim", "dimension must be at least 1"));
        }
        if file.s.len() != file.dim {
            return Err(Error::parse(
                "s",
                format!("expected {} entries, found {}", file.dim, file.s.len()),
            ));
        }
        let start = file
            .s
            .iter()
            .enumerate()
            .map(|(idx, lit)| {
                Scalar::parse_literal(lit).map_err(|_| Error::parse(format!("s[{idx}]"), format!("bad literal {lit:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut terms = Vec::with_capacity(file.coeffs.len());
        let mut seen = std::collections::HashSet::new();
        for (idx, e) in file.coeffs.iter().enumerate() {
            let loc = format!("coeffs[{idx}]");
            for (name, v) in [("k", e.k), ("i", e.i), ("j", e.j)] {
                if v == 0 || v > file.dim {
                    return Err(Error::parse(
                        format!("{loc}.{name}"),
                        format!("index {v} outside 1..={}", file.dim),
                    ));
                }
            }
            if !seen.insert((e.k, e.i, e.j)) {
                return Err(Error::parse(loc, "duplicate index triple"));
            }
            let c = Scalar::parse_literal(&e.c)
                .map_err(|_| Error::parse(format!("{loc}.c"), format!("bad literal {:?}", e.c)))?;
            terms.push(Term { k: e.k - 1, i: e.i - 1, j: e.j - 1, c });
        }
        System::new(file.dim, Vector(start), terms)
    }
}

fn literal(x: &Scalar) -> String {
    match x {
        Scalar::Exact(r) => r.to_string(),
        Scalar::Float(_) => x.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arity: Option<usize>,
    s: Vec<String>,
    coeffs: Vec<CoeffEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffEntry {
    k: usize,
    i: usize,
    j: usize,
    c: String,
}
