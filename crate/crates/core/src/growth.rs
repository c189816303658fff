//! Exact per-entry maxima `g_i(n)`.
//!
//! For nonnegative systems the maxima are recovered from the Pareto frontier
//! of `A_n`: since `*` is monotone on nonnegative vectors, a dominated vector
//! can never produce a larger entry later. General systems fall back to
//! exhaustive enumeration with value deduplication.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::FrontierCache;
use crate::error::{Error, Result};
use crate::numerics::{Mode, Scalar};
use crate::system::{System, Vector};
use crate::trees::BinaryTree;

pub const DEFAULT_FRONTIER_CAP: usize = 10_000;
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 500_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierEntry {
    pub vector: Vector,
    pub witness: BinaryTree,
}

/// The componentwise-maximal vectors of `A_n`, each with a witness tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoFrontier {
    pub n: usize,
    entries: Vec<FrontierEntry>,
    /// Set when top-K truncation dropped nondominated vectors.
    pub truncated: bool,
}

impl ParetoFrontier {
    pub fn entries(&self) -> &[FrontierEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn from_entries(n: usize, entries: Vec<FrontierEntry>, truncated: bool) -> Self {
        ParetoFrontier { n, entries, truncated }
    }

    /// Largest `i`-th entry and the text-smallest witness attaining it.
    fn best_for(&self, i: usize) -> (&Scalar, &BinaryTree) {
        let mut best: Option<(&Scalar, &BinaryTree)> = None;
        for e in &self.entries {
            let v = &e.vector[i];
            best = match best {
                None => Some((v, &e.witness)),
                Some((bv, bw)) => {
                    if v > bv || (v == bv && e.witness.cmp_text(bw).is_lt()) {
                        Some((v, &e.witness))
                    } else {
                        Some((bv, bw))
                    }
                }
            };
        }
        best.expect("non-empty frontier")
    }
}

#[derive(Debug, Clone)]
pub struct FrontierOptions {
    /// Maximum frontier size per `n` before failing (or truncating).
    pub cap: usize,
    /// Keep only the top `K` vectors by each coordinate once the cap is hit.
    /// Results then become lower bounds on `g_i(n)`.
    pub approx_top_k: Option<usize>,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        FrontierOptions { cap: DEFAULT_FRONTIER_CAP, approx_top_k: None }
    }
}

fn insert_candidate(map: &mut HashMap<Vector, BinaryTree>, v: Vector, w: BinaryTree) {
    match map.get_mut(&v) {
        Some(cur) => {
            if w.cmp_text(cur).is_lt() {
                *cur = w;
            }
        }
        None => {
            map.insert(v, w);
        }
    }
}

/// Removes dominated vectors. Anything that dominates `v` is
/// lexicographically larger, so a descending sweep only has to compare
/// against vectors already kept.
fn prune(candidates: HashMap<Vector, BinaryTree>) -> Vec<FrontierEntry> {
    let mut all: Vec<(Vector, BinaryTree)> = candidates.into_iter().collect();
    all.sort_by(|a, b| b.0.cmp(&a.0));
    let mut kept: Vec<FrontierEntry> = Vec::new();
    for (v, w) in all {
        if kept.iter().any(|k| v.dominated_by(&k.vector)) {
            continue;
        }
        kept.push(FrontierEntry { vector: v, witness: w });
    }
    kept.sort_by(|a, b| a.vector.cmp(&b.vector));
    kept
}

fn truncate_top_k(entries: Vec<FrontierEntry>, dim: usize, k: usize) -> Vec<FrontierEntry> {
    let mut keep = vec![false; entries.len()];
    for i in 0..dim {
        let mut idx: Vec<usize> = (0..entries.len()).collect();
        idx.sort_by(|&a, &b| entries[b].vector[i].cmp(&entries[a].vector[i]).then(a.cmp(&b)));
        for &j in idx.iter().take(k) {
            keep[j] = true;
        }
    }
    entries
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect()
}

fn combine_level(sys: &System, prev: &[ParetoFrontier], n: usize) -> HashMap<Vector, BinaryTree> {
    (1..n)
        .into_par_iter()
        .map(|m| {
            let mut local = HashMap::new();
            for x in prev[m - 1].entries() {
                for y in prev[n - m - 1].entries() {
                    let v = sys.combine(&x.vector, &y.vector);
                    insert_candidate(
                        &mut local,
                        v,
                        BinaryTree::node(x.witness.clone(), y.witness.clone()),
                    );
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (v, w) in b {
                insert_candidate(&mut a, v, w);
            }
            a
        })
}

pub fn frontier_dp(sys: &System, max_n: usize) -> Result<Vec<ParetoFrontier>> {
    frontier_dp_with(sys, max_n, &FrontierOptions::default(), None)
}

/// Frontiers for `n = 1..=max_n` (index `n - 1`), optionally reading and
/// writing an on-disk cache.
pub fn frontier_dp_with(
    sys: &System,
    max_n: usize,
    opts: &FrontierOptions,
    cache: Option<&FrontierCache>,
) -> Result<Vec<ParetoFrontier>> {
    sys.require_nonneg("the Pareto-frontier dynamic program")?;
    let cache = cache.filter(|_| sys.mode() == Mode::Exact && opts.approx_top_k.is_none());
    let hash = cache.map(|_| sys.content_hash());
    let mut out: Vec<ParetoFrontier> = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        if let (Some(c), Some(h)) = (cache, hash.as_deref()) {
            if let Some(f) = c.load(h, n)? {
                out.push(f);
                continue;
            }
        }
        let frontier = if n == 1 {
            ParetoFrontier::from_entries(
                1,
                vec![FrontierEntry { vector: sys.start().clone(), witness: BinaryTree::leaf() }],
                false,
            )
        } else {
            let inherited = out[..n - 1].iter().any(|f| f.truncated);
            let mut entries = prune(combine_level(sys, &out, n));
            let mut truncated = inherited;
            if entries.len() > opts.cap {
                match opts.approx_top_k {
                    Some(k) => {
                        let before = entries.len();
                        entries = truncate_top_k(entries, sys.dim(), k);
                        truncated |= entries.len() < before;
                    }
                    None => {
                        return Err(Error::Resource {
                            n,
                            message: format!(
                                "Pareto frontier has {} vectors, cap is {}",
                                entries.len(),
                                opts.cap
                            ),
                        })
                    }
                }
            }
            ParetoFrontier::from_entries(n, entries, truncated)
        };
        if let (Some(c), Some(h)) = (cache, hash.as_deref()) {
            c.store(h, &frontier)?;
        }
        out.push(frontier);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// Exact maxima from the frontier DP or enumeration.
    Exact,
    /// Frontier truncation was used; values are lower bounds on `g_i(n)`.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    MaxAbs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRow {
    pub n: usize,
    /// `g_i(n)` for each coordinate.
    pub per_entry: Vec<Scalar>,
    /// `g(n) = max_i g_i(n)`.
    pub max: Scalar,
    pub witnesses: Vec<BinaryTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub kind: TableKind,
    pub mode: Mode,
}

impl GrowthTable {
    pub fn max_n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.per_entry.len())
    }

    /// `g(n)`, 1-based `n`.
    pub fn g(&self, n: usize) -> &Scalar {
        &self.rows[n - 1].max
    }

    /// `g_i(n)`, 1-based `n`, 0-based `i`.
    pub fn g_i(&self, n: usize, i: usize) -> &Scalar {
        &self.rows[n - 1].per_entry[i]
    }

    pub fn witness(&self, n: usize, i: usize) -> &BinaryTree {
        &self.rows[n - 1].witnesses[i]
    }

    /// `g(n)^(1/n)` for every tabulated `n`.
    pub fn empirical_rates(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, r.max.root_f64(r.n))).collect()
    }

    /// TSV with columns `n, g_1..g_d, g, witness_1..witness_d`.
    pub fn to_tsv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("n");
        for i in 1..=d {
            write!(out, "\tg_{i}").unwrap();
        }
        out.push_str("\tg");
        for i in 1..=d {
            write!(out, "\twitness_{i}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{}", r.n).unwrap();
            for v in &r.per_entry {
                write!(out, "\t{v}").unwrap();
            }
            write!(out, "\t{}", r.max).unwrap();
            for w in &r.witnesses {
                write!(out, "\t{w}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn from_rows(rows: Vec<GrowthRow>, kind: TableKind, mode: Mode) -> Self {
        GrowthTable { rows, kind, mode }
    }
}

fn row_from_frontier(f: &ParetoFrontier, dim: usize) -> GrowthRow {
    let (per_entry, witnesses): (Vec<Scalar>, Vec<BinaryTree>) = (0..dim)
        .map(|i| {
            let (v, w) = f.best_for(i);
            (v.clone(), w.clone())
        })
        .unzip();
    let max = per_entry.iter().max().expect("dim >= 1").clone();
    GrowthRow { n: f.n, per_entry, max, witnesses }
}

pub fn table_from_frontiers(sys: &System, frontiers: &[ParetoFrontier]) -> GrowthTable {
    let truncated = frontiers.iter().any(|f| f.truncated);
    GrowthTable::from_rows(
        frontiers.iter().map(|f| row_from_frontier(f, sys.dim())).collect(),
        if truncated { TableKind::LowerBound } else { TableKind::Exact },
        sys.mode(),
    )
}

/// Growth table via the frontier DP for nonnegative systems, brute force otherwise.
pub fn growth_table(sys: &System, max_n: usize) -> Result<GrowthTable> {
    if sys.is_nonneg() {
        Ok(table_from_frontiers(sys, &frontier_dp(sys, max_n)?))
    } else {
        brute_force(sys, max_n, Norm::MaxAbs)
    }
}

pub fn brute_force(sys: &System, max_n: usize, norm: Norm) -> Result<GrowthTable> {
    brute_force_with_cap(sys, max_n, norm, DEFAULT_BRUTE_FORCE_CAP)
}

/// The distinct vectors of `A_1..=A_max_n`, each with its text-smallest
/// witness, sorted by vector.
pub fn distinct_values(sys: &System, max_n: usize, cap: usize) -> Result<Vec<Vec<(Vector, BinaryTree)>>> {
    let mut levels: Vec<Vec<(Vector, BinaryTree)>> = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        if n == 1 {
            levels.push(vec![(sys.start().clone(), BinaryTree::leaf())]);
            continue;
        }
        let map = (1..n)
            .into_par_iter()
            .map(|m| {
                let mut local = HashMap::new();
                for (x, tx) in &levels[m - 1] {
                    for (y, ty) in &levels[n - m - 1] {
                        insert_candidate(&mut local, sys.combine(x, y), BinaryTree::node(tx.clone(), ty.clone()));
                    }
                }
                local
            })
            .reduce(HashMap::new, |mut a, b| {
                for (v, w) in b {
                    insert_candidate(&mut a, v, w);
                }
                a
            });
        if map.len() > cap {
            return Err(Error::Resource {
                n,
                message: format!("|A_n| = {} distinct vectors exceeds the cap {cap}", map.len()),
            });
        }
        let mut v: Vec<_> = map.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        levels.push(v);
    }
    Ok(levels)
}

/// Enumerates `A_n` exactly, deduplicating equal vectors. `g_i(n)` is the
/// largest `|x_i|`, which is the plain maximum for nonnegative systems.
pub fn brute_force_with_cap(sys: &System, max_n: usize, norm: Norm, cap: usize) -> Result<GrowthTable> {
    let Norm::MaxAbs = norm;
    let levels = distinct_values(sys, max_n, cap)?;
    let mut rows = Vec::with_capacity(max_n);
    for (idx, level) in levels.iter().enumerate() {
        let n = idx + 1;
        let mut per_entry = Vec::with_capacity(sys.dim());
        let mut witnesses = Vec::with_capacity(sys.dim());
        for i in 0..sys.dim() {
            let mut best: Option<(Scalar, &BinaryTree)> = None;
            for (v, w) in level {
                let a = v[i].abs();
                best = match best {
                    Some((b, bw)) if b > a || (b == a && bw.cmp_text(w).is_le()) => Some((b, bw)),
                    _ => Some((a, w)),
                };
            }
            let (b, w) = best.expect("A_n is non-empty");
            per_entry.push(b);
            witnesses.push(w.clone());
        }
        let max = per_entry.iter().max().expect("dim >= 1").clone();
        rows.push(GrowthRow { n, per_entry, max, witnesses });
    }
    Ok(GrowthTable::from_rows(rows, TableKind::Exact, sys.mode()))
}

/// Componentwise relaxation `G_k(n) = max_m Σ c[k][i][j] G_i(m) G_j(n-m)`,
/// an upper envelope of `g_k(n)` for nonnegative systems.
pub fn relaxed_envelope(sys: &System, max_n: usize) -> Result<Vec<Vector>> {
    sys.require_nonneg("the relaxed envelope")?;
    let mut env: Vec<Vector> = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        if n == 1 {
            env.push(sys.start().clone());
            continue;
        }
        let mut best: Vec<Scalar> = vec![Scalar::zero(sys.mode()); sys.dim()];
        for m in 1..n {
            let v = sys.combine(&env[m - 1], &env[n - m - 1]);
            for (b, x) in best.iter_mut().zip(v.into_entries()) {
                if x > *b {
                    *b = x;
                }
            }
        }
        env.push(Vector::new(best));
    }
    Ok(env)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    /// `g(2) / min_k s_k`.
    pub constant: String,
    pub constant_value: f64,
    /// Largest observed `g_i(n+1) / g_i(n)` over positive denominators.
    pub max_observed: f64,
    /// `(n, i)` pairs (1-based) where `g_i(n+1)` exceeds the bound.
    pub violations: Vec<(usize, usize)>,
    pub holds: bool,
}

/// Checks `g_i(n+1) <= (g(2) / min_k s_k) g_i(n)` across the table.
pub fn ratio_check(table: &GrowthTable, sys: &System) -> Result<RatioReport> {
    sys.require_nonneg("the adjacent-ratio check")?;
    if table.max_n() < 2 {
        return Err(Error::Domain("the ratio check needs g(2)".into()));
    }
    let min_s = sys.start().entries().iter().min().expect("dim >= 1").clone();
    let constant = table.g(2) / &min_s;
    let mut max_observed: f64 = 0.0;
    let mut violations = Vec::new();
    for n in 1..table.max_n() {
        for i in 0..table.dim() {
            let (a, b) = (table.g_i(n + 1, i), table.g_i(n, i));
            if *a > &constant * b {
                violations.push((n, i + 1));
            }
            if b.is_positive() {
                max_observed = max_observed.max((a.ln_abs() - b.ln_abs()).exp());
            }
        }
    }
    Ok(RatioReport {
        constant: constant.to_string(),
        constant_value: constant.to_f64(),
        max_observed,
        holds: violations.is_empty(),
        violations,
    })
}

/// Checks `g(n) <= C max_{m<n} g(m) g(n-m)` with `C` the coefficient mass bound.
pub fn root_split_check(table: &GrowthTable, sys: &System) -> Result<Vec<usize>> {
    let c = sys.coeff_row_sum_bound()?;
    let mut bad = Vec::new();
    for n in 2..=table.max_n() {
        let best = (1..n)
            .map(|m| table.g(m) * table.g(n - m))
            .max()
            .expect("n >= 2");
        if *table.g(n) > &c * &best {
            bad.push(n);
        }
    }
    Ok(bad)
}

/// Whether `g_i(p+q) >= g_i(p) g_i(q)` for every tabulated `p + q`.
pub fn is_supermultiplicative(table: &GrowthTable, i: usize) -> bool {
    let n = table.max_n();
    (2..=n).all(|total| (1..total).all(|p| *table.g_i(total, i) >= table.g_i(p, i) * table.g_i(total - p, i)))
}

/// For each `n >= 2`, the largest `g(p+q) / (g(p) g(q))` over `p + q = n`.
pub fn split_ratios(table: &GrowthTable) -> Vec<(usize, f64)> {
    (2..=table.max_n())
        .map(|n| {
            let r = (1..n)
                .map(|p| table.g(n).ln_abs() - table.g(p).ln_abs() - table.g(n - p).ln_abs())
                .fold(f64::NEG_INFINITY, f64::max);
            (n, r.exp())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn ints(v: &[Scalar]) -> Vec<i64> {
        v.iter().map(|x| x.as_integer().unwrap().try_into().unwrap()).collect()
    }

    #[test]
    fn fibonacci_frontier_at_four() {
        let f = frontier_dp(&fib(), 4).unwrap();
        assert_eq!(f[3].len(), 1);
        assert_eq!(f[3].entries()[0].vector, Vector::from_ints(&[5, 3]));
    }

    #[test]
    fn frontier_at_one_is_start() {
        let f = frontier_dp(&doubling(), 1).unwrap();
        assert_eq!(f[0].entries()[0].vector, Vector::from_ints(&[1, 1]));
        assert_eq!(f[0].entries()[0].witness, BinaryTree::leaf());
    }

    #[test]
    fn constant_system_frontier() {
        let f = frontier_dp(&constant_n1(), 6).unwrap();
        assert_eq!(f[5].len(), 1);
        assert_eq!(f[5].entries()[0].vector, Vector::from_ints(&[6, 1]));
    }

    #[test]
    fn fibonacci_table() {
        let t = growth_table(&fib(), 10).unwrap();
        let g1: Vec<i64> = (1..=10).map(|n| ints(&t.rows[n - 1].per_entry)[0]).collect();
        let g2: Vec<i64> = (1..=10).map(|n| ints(&t.rows[n - 1].per_entry)[1]).collect();
        assert_eq!(g1, [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert_eq!(g2, [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]);
    }

    #[test]
    fn doubling_table() {
        let t = growth_table(&doubling(), 8).unwrap();
        assert_eq!(*t.g(2), Scalar::from_int(2));
        assert_eq!(*t.g(4), Scalar::from_int(5));
        assert_eq!(*t.g(8), Scalar::from_int(26));
        assert_eq!(t.witness(4, 0).to_string(), "((ss)(ss))");
    }

    #[test]
    fn open_problem_table_increases() {
        let t = growth_table(&open_problem(), 6).unwrap();
        let b = brute_force(&open_problem(), 6, Norm::MaxAbs).unwrap();
        assert_eq!(*t.g(2), Scalar::from_int(2));
        for n in 1..6 {
            assert!(t.g(n + 1) > t.g(n));
            assert_eq!(t.g(n), b.g(n));
        }
    }

    #[test]
    fn witnesses_reevaluate() {
        for sys in [fib(), doubling(), constant_n1(), open_problem()] {
            for f in frontier_dp(&sys, 12).unwrap() {
                for e in f.entries() {
                    assert_eq!(e.witness.leaves(), f.n);
                    assert_eq!(e.witness.eval(&sys), e.vector);
                }
            }
        }
    }

    #[test]
    fn frontier_is_an_antichain() {
        for f in frontier_dp(&open_problem(), 14).unwrap() {
            for (a, x) in f.entries().iter().enumerate() {
                for (b, y) in f.entries().iter().enumerate() {
                    if a != b {
                        assert!(!x.vector.dominated_by(&y.vector));
                    }
                }
            }
        }
    }

    #[test]
    fn general_class_is_rejected_by_dp() {
        let p3 = System::from_ints(&[1, 0], &[(1, 2, 2, 1), (2, 1, 1, 1)]).unwrap();
        assert!(matches!(frontier_dp(&p3, 3), Err(Error::Domain(_))));
        assert!(relaxed_envelope(&p3, 3).is_err());
        // growth_table falls back to brute force
        let t = growth_table(&p3, 9).unwrap();
        let g: Vec<i64> = (1..=9).map(|n| t.g(n).as_integer().unwrap().try_into().unwrap()).collect();
        assert_eq!(g, [1, 1, 0, 1, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn signed_systems() {
        let signed_s = System::from_ints(&[1, -1, 1], &[(1, 1, 1, 1), (2, 2, 2, 1), (3, 1, 3, 3), (3, 2, 3, 3)]).unwrap();
        let signed_c = System::from_ints(&[1, 1, 1], &[(1, 1, 1, 1), (2, 2, 2, -1), (3, 1, 3, 3), (3, 2, 3, -3)]).unwrap();
        for sys in [signed_s, signed_c] {
            let t = brute_force(&sys, 7, Norm::MaxAbs).unwrap();
            let g: Vec<i64> = (1..=7).map(|n| t.g(n).as_integer().unwrap().try_into().unwrap()).collect();
            assert_eq!(g, [1, 1, 6, 1, 36, 1, 216]);
        }
    }

    #[test]
    fn brute_force_cap() {
        match brute_force_with_cap(&open_problem(), 8, Norm::MaxAbs, 3) {
            Err(Error::Resource { n, .. }) => assert!(n <= 8),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn frontier_cap_and_truncation() {
        let sys = open_problem();
        let exact = frontier_dp(&sys, 12).unwrap();
        let biggest = exact.iter().map(ParetoFrontier::len).max().unwrap();
        assert!(biggest > 1);
        let strict = FrontierOptions { cap: 1, approx_top_k: None };
        assert!(matches!(frontier_dp_with(&sys, 12, &strict, None), Err(Error::Resource { .. })));
        let approx = FrontierOptions { cap: 1, approx_top_k: Some(1) };
        let f = frontier_dp_with(&sys, 12, &approx, None).unwrap();
        let t = table_from_frontiers(&sys, &f);
        assert_eq!(t.kind, TableKind::LowerBound);
        let full = table_from_frontiers(&sys, &exact);
        for n in 1..=12 {
            for i in 0..2 {
                assert!(t.g_i(n, i) <= full.g_i(n, i));
            }
        }
    }

    #[test]
    fn envelope_examples() {
        let sys = constant_n1();
        let env = relaxed_envelope(&sys, 10).unwrap();
        let t = growth_table(&sys, 10).unwrap();
        for n in 1..=10 {
            assert_eq!(env[n - 1].entries(), t.rows[n - 1].per_entry.as_slice());
        }
        let env = relaxed_envelope(&fib(), 4).unwrap();
        assert!(env[3][0] >= Scalar::from_int(5));
        let scalar = System::from_ints(&[1], &[(1, 1, 1, 1)]).unwrap();
        for v in relaxed_envelope(&scalar, 8).unwrap() {
            assert_eq!(v, Vector::from_ints(&[1]));
        }
    }

    #[test]
    fn envelope_dominates_table() {
        for sys in [fib(), doubling(), open_problem()] {
            let env = relaxed_envelope(&sys, 12).unwrap();
            let t = growth_table(&sys, 12).unwrap();
            for n in 1..=12 {
                for (i, bound) in env[n - 1].entries().iter().enumerate() {
                    assert!(t.g_i(n, i) <= bound);
                }
            }
        }
    }

    #[test]
    fn ratio_checks() {
        let r = ratio_check(&growth_table(&fib(), 20).unwrap(), &fib()).unwrap();
        assert!(r.holds);
        assert_eq!(r.constant, "2");
        assert!(r.max_observed <= 2.0);
        let r = ratio_check(&growth_table(&doubling(), 12).unwrap(), &doubling()).unwrap();
        assert!(r.holds, "{r:?}");
        let r = ratio_check(&growth_table(&constant_n1(), 12).unwrap(), &constant_n1()).unwrap();
        assert!(r.holds);
        assert!((r.max_observed - 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_split_and_supermultiplicativity() {
        for sys in [fib(), doubling(), constant_n1(), open_problem()] {
            let t = growth_table(&sys, 12).unwrap();
            assert!(root_split_check(&t, &sys).unwrap().is_empty());
        }
        let t = growth_table(&doubling(), 14).unwrap();
        assert!(is_supermultiplicative(&t, 0));
        let t = growth_table(&constant_n1(), 6).unwrap();
        assert!(!is_supermultiplicative(&t, 0));
        assert!(is_supermultiplicative(&t, 1));
    }

    #[test]
    fn float_mode_tracks_exact_values() {
        let sys = fib();
        let exact = growth_table(&sys, 30).unwrap();
        let fsys = sys.to_mode(Mode::Float);
        let float = table_from_frontiers(&fsys, &frontier_dp(&fsys, 30).unwrap());
        assert_eq!(float.mode, Mode::Float);
        for n in 1..=30 {
            let (a, b) = (exact.g(n).ln_abs(), float.g(n).ln_abs());
            assert!((a - b).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn tsv_layout() {
        let t = growth_table(&fib(), 3).unwrap();
        let tsv = t.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines[0], "n\tg_1\tg_2\tg\twitness_1\twitness_2");
        assert_eq!(lines[1], "1\t1\t1\t1\ts\ts");
        assert_eq!(lines[3], "3\t3\t2\t3\t((ss)s)\t((ss)s)");
    }
}
