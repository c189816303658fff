//! Certified lower and upper bounds on the growth rate.
//!
//! Lower bounds come from pattern rates and, for entries whose tabulated
//! values are verified supermultiplicative, from `max_n g_i(n)^(1/n)`.
//! Upper bounds come from a weight vector `w >= s` with
//! `Σ c[k][i][j] w_i w_j <= μ w_k` for every `k`: by induction every value of
//! an `n`-leaf tree is at most `μ^(n-1) w`, so the rate is at most `μ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::growth::{growth_table, is_supermultiplicative, split_ratios, GrowthTable, TableKind};
use crate::numerics::{Mode, Scalar};
use crate::patterns::{search_patterns, PatternReport, Strategy};
use crate::system::{System, Vector};

// Downward widening of `g_i(n)^(1/n)` computed in f64.
const ROOT_SLACK: f64 = 4.0 * f64::EPSILON;
// Supplied or searched weights are snapped to this dyadic grid before the exact check.
const GRID_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LyapunovCertificate {
    pub w: Vector,
    pub mu: Scalar,
}

impl LyapunovCertificate {
    /// Exact replay: `w > 0`, `s <= w`, and `Σ c w_i w_j <= μ w_k` for all `k`.
    pub fn check(&self, sys: &System) -> bool {
        if self.w.len() != sys.dim() || self.w.entries().iter().any(|x| !x.is_positive()) {
            return false;
        }
        if !sys.start().dominated_by(&self.w) {
            return false;
        }
        let lhs = sys.combine(&self.w, &self.w);
        (0..sys.dim()).all(|k| lhs[k] <= &self.mu * &self.w[k])
    }

    /// The certified bound `μ max_i s_i / w_i`.
    pub fn bound(&self, sys: &System) -> Scalar {
        &self.mu * &max_ratio(sys.start(), &self.w)
    }
}

impl Serialize for LyapunovCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LyapunovCertificate", 2)?;
        st.serialize_field("w", &self.w.entries().iter().map(Scalar::to_string).collect::<Vec<_>>())?;
        st.serialize_field("mu", &self.mu.to_string())?;
        st.end()
    }
}

fn max_ratio(s: &Vector, w: &Vector) -> Scalar {
    s.entries().iter().zip(w.entries()).map(|(a, b)| a / b).max().expect("dim >= 1")
}

/// Smallest `μ` valid for `w`: `max_k Σ c w_i w_j / w_k`.
fn exact_mu(sys: &System, w: &Vector) -> Scalar {
    let lhs = sys.combine(w, w);
    (0..sys.dim()).map(|k| &lhs[k] / &w[k]).max().expect("dim >= 1")
}

/// Certificate for `w` rescaled so that `s <= w` with equality somewhere.
fn certify(sys: &System, w: &Vector) -> LyapunovCertificate {
    let sigma = max_ratio(sys.start(), w);
    let w = Vector::new(w.entries().iter().map(|x| x * &sigma).collect());
    let mu = exact_mu(sys, &w);
    LyapunovCertificate { w, mu }
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub exact: String,
    pub certificate: LyapunovCertificate,
}

fn require_exact(sys: &System) -> Result<()> {
    if sys.mode() != Mode::Exact {
        return Err(Error::Domain("certified bounds need exact arithmetic".into()));
    }
    Ok(())
}

fn finish_upper(sys: &System, cert: LyapunovCertificate) -> UpperBound {
    debug_assert!(cert.check(sys));
    let b = cert.bound(sys);
    UpperBound { value: ceil_f64(&b), exact: b.to_string(), certificate: cert }
}

pub fn upper_bound(sys: &System, w: Option<&Vector>) -> Result<UpperBound> {
    upper_bound_seeded(sys, w, None)
}

/// Upper bound from the supplied `w`, or from a coordinate-descent search
/// seeded by `s`, the all-ones vector, and the table's last row.
pub fn upper_bound_seeded(sys: &System, w: Option<&Vector>, seed: Option<&GrowthTable>) -> Result<UpperBound> {
    sys.require_nonneg("the Lyapunov upper bound")?;
    require_exact(sys)?;
    if let Some(w) = w {
        if w.len() != sys.dim() {
            return Err(Error::Shape(format!("weight of length {} for dimension {}", w.len(), sys.dim())));
        }
        if w.entries().iter().any(|x| !x.is_positive()) {
            return Err(Error::Domain("weights must be strictly positive".into()));
        }
        return Ok(finish_upper(sys, certify(sys, w)));
    }

    let d = sys.dim();
    let s: Vec<f64> = sys.start().entries().iter().map(Scalar::to_f64).collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut seeds: Vec<Vec<f64>> = vec![s.iter().map(|x| x / smax).collect(), vec![1.0; d]];
    if let Some(t) = seed.filter(|t| t.max_n() > 0 && t.mode == Mode::Exact) {
        let n = t.max_n();
        let g = t.g(n).ln_abs();
        seeds.push((0..d).map(|i| (t.g_i(n, i).ln_abs() - g).exp().max(s[i] / smax)).collect());
    }
    let terms: Vec<(usize, usize, usize, f64)> =
        sys.terms().iter().map(|t| (t.k, t.i, t.j, t.c.to_f64())).collect();

    let mut best: Option<LyapunovCertificate> = None;
    for seed in seeds {
        let w = descend(&terms, &s, seed);
        let cert = certify(sys, &snap(&w));
        best = match best {
            Some(b) if b.bound(sys) <= cert.bound(sys) => Some(b),
            _ => Some(cert),
        };
    }
    Ok(finish_upper(sys, best.expect("at least one seed")))
}

fn objective(terms: &[(usize, usize, usize, f64)], s: &[f64], w: &[f64]) -> f64 {
    let mut lhs = vec![0.0; w.len()];
    for &(k, i, j, c) in terms {
        lhs[k] += c * w[i] * w[j];
    }
    let mu = lhs.iter().zip(w).map(|(l, x)| l / x).fold(0.0, f64::max);
    let sigma = s.iter().zip(w).map(|(a, x)| a / x).fold(0.0, f64::max);
    mu * sigma
}

/// Multiplicative coordinate descent on `μ(w) max_i s_i / w_i`.
fn descend(terms: &[(usize, usize, usize, f64)], s: &[f64], mut w: Vec<f64>) -> Vec<f64> {
    let mut f = objective(terms, s, &w);
    let mut step = 0.5;
    while step > 1e-7 {
        let mut improved = false;
        for i in 0..w.len() {
            for factor in [1.0 + step, 1.0 / (1.0 + step)] {
                let old = w[i];
                w[i] = old * factor;
                let g = objective(terms, s, &w);
                if g < f {
                    f = g;
                    improved = true;
                } else {
                    w[i] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    w
}

/// Rounds to a dyadic grid relative to the largest weight, keeping entries positive.
fn snap(w: &[f64]) -> Vector {
    let top = w.iter().cloned().fold(0.0, f64::max);
    let den = BigInt::from(1u64 << GRID_BITS);
    Vector::new(
        w.iter()
            .map(|x| {
                let num = ((x / top) * (1u64 << GRID_BITS) as f64).round().max(1.0);
                Scalar::Exact(BigRational::new(BigInt::from(num as u64), den.clone()))
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LowerCertificate {
    Pattern(PatternReport),
    /// `g_i(p+q) >= g_i(p) g_i(q)` verified for every tabulated split, so
    /// `g_i(n)^(1/n)` bounds the rate from below for every `n`.
    Supermultiplicative { entry: usize, n: usize, g: String },
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub certificate: LowerCertificate,
}

/// Best of the pattern search and the supermultiplicative table entries.
pub fn lower_bound(sys: &System, max_leaves: usize, table: &GrowthTable) -> Result<LowerBound> {
    sys.require_nonneg("the lower bound")?;
    let search = match search_patterns(sys, max_leaves, Strategy::Exhaustive) {
        Ok(s) => Some(s),
        Err(Error::SearchBudget { partial, .. }) => Some(*partial),
        Err(e) => return Err(e),
    };
    let mut best = LowerBound { value: 0.0, certificate: LowerCertificate::None };
    if let Some(r) = search.as_ref().and_then(|s| s.best()) {
        if r.rate.0 > best.value {
            best = LowerBound { value: r.rate.0, certificate: LowerCertificate::Pattern(r.clone()) };
        }
    }
    if table.kind == TableKind::Exact {
        for i in 0..table.dim() {
            if !is_supermultiplicative(table, i) {
                continue;
            }
            for n in 1..=table.max_n() {
                let v = table.g_i(n, i).root_f64(n) * (1.0 - ROOT_SLACK);
                if v > best.value {
                    best = LowerBound {
                        value: v,
                        certificate: LowerCertificate::Supermultiplicative {
                            entry: i + 1,
                            n,
                            g: table.g_i(n, i).to_string(),
                        },
                    };
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateBounds {
    pub lower: LowerBound,
    pub upper: UpperBound,
    /// `(n, g(n)^(1/n))`; observed, not certified.
    pub empirical: Vec<(usize, f64)>,
    /// `(n, max_{p+q=n} g(n) / (g(p) g(q)))`; observed, not certified.
    pub split_ratios: Vec<(usize, f64)>,
}

pub fn bounds_report(sys: &System, max_n: usize, max_leaves: usize) -> Result<RateBounds> {
    sys.require_nonneg("the bounds report")?;
    require_exact(sys)?;
    let table = growth_table(sys, max_n)?;
    let lower = lower_bound(sys, max_leaves, &table)?;
    let upper = upper_bound_seeded(sys, None, Some(&table))?;
    if !upper.certificate.check(sys) {
        return Err(Error::Domain("the Lyapunov certificate failed its exact replay".into()));
    }
    // The lower value is an f64 below the true certified quantity; compare
    // against the exact upper bound.
    let lo = BigRational::from_float(lower.value).expect("finite lower bound");
    let up = upper.certificate.bound(sys);
    if Scalar::Exact(lo) > up {
        return Err(Error::Domain(format!(
            "lower bound {} exceeds upper bound {}",
            lower.value,
            up.to_f64()
        )));
    }
    Ok(RateBounds { lower, upper, empirical: table.empirical_rates(), split_ratios: split_ratios(&table) })
}

/// `g(n) <= μ^(n-1) max_i w_i` for every tabulated `n`.
pub fn envelope_holds(cert: &LyapunovCertificate, table: &GrowthTable) -> bool {
    let wmax = cert.w.max_entry().expect("dim >= 1");
    (1..=table.max_n()).all(|n| *table.g(n) <= &cert.mu.pow((n - 1) as u32) * wmax)
}

/// `b` as an f64 rounded up.
fn ceil_f64(b: &Scalar) -> f64 {
    let v = b.to_f64();
    match b.as_rational().and_then(|r| BigRational::from_float(v).map(|f| f < *r)) {
        Some(true) => v.next_up(),
        _ => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    fn fib() -> System {
        System::from_ints(&[1, 1], &[(1, 1, 2, 1), (1, 2, 1, 1), (2, 1, 2, 1)]).unwrap()
    }

    fn doubling() -> System {
        System::from_ints(&[1, 1], &[(1, 1, 1, 1), (1, 2, 2, 1), (2, 2, 2, 1)]).unwrap()
    }

    fn constant_n1() -> System {
        System::from_ints(&[1, 1], &[(1, 1, 2, 1), (1, 2, 1, 1), (2, 2, 2, 1)]).unwrap()
    }

    fn open_problem() -> System {
        System::from_ints(&[1, 1], &[(1, 1, 1, 1), (1, 2, 2, 1), (2, 1, 1, 1)]).unwrap()
    }

    #[test]
    fn supplied_weights() {
        let u = upper_bound(&fib(), Some(&Vector::from_ints(&[2, 1]))).unwrap();
        assert_eq!(u.certificate.mu, Scalar::from_int(2));
        assert_eq!(u.exact, "2");
        let scalar = System::from_ints(&[1], &[(1, 1, 1, 1)]).unwrap();
        let u = upper_bound(&scalar, Some(&Vector::from_ints(&[1]))).unwrap();
        assert_eq!(u.exact, "1");
        let u = upper_bound(&doubling(), Some(&Vector::from_ints(&[2, 1]))).unwrap();
        assert_eq!(u.certificate.mu, Scalar::ratio(5, 2));
        assert_eq!(u.exact, "5/2");
    }

    #[test]
    fn invalid_weights() {
        assert!(matches!(upper_bound(&fib(), Some(&Vector::from_ints(&[1, 0]))), Err(Error::Domain(_))));
        assert!(matches!(upper_bound(&fib(), Some(&Vector::from_ints(&[1]))), Err(Error::Shape(_))));
    }

    #[test]
    fn searched_weights_are_certified() {
        for sys in [fib(), doubling(), constant_n1(), open_problem()] {
            let u = upper_bound(&sys, None).unwrap();
            assert!(u.certificate.check(&sys));
            let t = growth_table(&sys, 14).unwrap();
            assert!(envelope_holds(&u.certificate, &t));
        }
        // Fibonacci: the search finds μ = 2, matching (2, 1).
        let u = upper_bound(&fib(), None).unwrap();
        assert!((u.value - 2.0).abs() < 1e-6, "{}", u.value);
        // The doubling system improves on w = (2, 1).
        let u = upper_bound(&doubling(), None).unwrap();
        assert!(u.value < 2.5);
        // The constant system cannot go below 2: μ >= 2 w_2 and w_2 >= s_2 = 1.
        let u = upper_bound(&constant_n1(), None).unwrap();
        assert!(u.value >= 2.0 && u.value < 2.0 + 1e-5, "{}", u.value);
    }

    #[test]
    fn replay_rejects_bad_certificates() {
        let sys = fib();
        let bad = LyapunovCertificate { w: Vector::from_ints(&[2, 1]), mu: Scalar::ratio(3, 2) };
        assert!(!bad.check(&sys));
        let small = LyapunovCertificate { w: Vector::new(vec![Scalar::ratio(1, 2), Scalar::from_int(1)]), mu: Scalar::from_int(9) };
        assert!(!small.check(&sys));
    }

    #[test]
    fn lower_bounds() {
        let l = lower_bound(&fib(), 2, &growth_table(&fib(), 10).unwrap()).unwrap();
        assert!(l.value <= PHI && PHI - l.value < 1e-8);

        let l = lower_bound(&open_problem(), 3, &growth_table(&open_problem(), 6).unwrap()).unwrap();
        assert!((l.value - 1.652_891_650_281_0).abs() < 1e-6);

        let t = growth_table(&doubling(), 14).unwrap();
        let l = lower_bound(&doubling(), 2, &t).unwrap();
        assert!(l.value >= 26f64.powf(1.0 / 8.0) * (1.0 - 1e-12));
        assert!(matches!(l.certificate, LowerCertificate::Supermultiplicative { entry: 1, .. }));
    }

    #[test]
    fn reports() {
        let r = bounds_report(&fib(), 20, 4).unwrap();
        assert!(r.lower.value <= PHI && PHI - r.lower.value < 1e-8);
        assert!((r.upper.value - 2.0).abs() < 1e-6);
        let (n, v) = *r.empirical.last().unwrap();
        assert_eq!(n, 20);
        assert!((v - 10946f64.powf(1.0 / 20.0)).abs() < 1e-12);

        let r = bounds_report(&constant_n1(), 12, 4).unwrap();
        assert!((r.lower.value - 1.0).abs() < 1e-12);
        assert!(r.upper.certificate.check(&constant_n1()));

        let r = bounds_report(&doubling(), 14, 9).unwrap();
        assert!(r.lower.value > 1.5 && r.lower.value < 1.502_836_801);
        assert!(r.upper.value > 1.502_836_801);
    }

    #[test]
    fn report_json() {
        let r = bounds_report(&fib(), 6, 2).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["lower"]["certificate"]["kind"], "pattern");
        assert_eq!(v["upper"]["certificate"]["mu"], "2");
        assert_eq!(v["empirical"][0], serde_json::json!([1, 1.0]));
    }

    #[test]
    fn general_systems_rejected() {
        let sys = System::from_ints(&[1, 0], &[(1, 2, 2, 1), (2, 1, 1, 1)]).unwrap();
        assert!(bounds_report(&sys, 6, 3).is_err());
        assert!(bounds_report(&fib().to_mode(Mode::Float), 6, 3).is_err());
    }
}
