//! Linear patterns: a tree with one marked leaf. Putting a variable `u` at
//! the mark makes the tree's value a linear map `M u`, and the pattern's rate
//! `ρ(M)^(1/(|T|-1))` is a lower bound on the growth rate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::growth::{distinct_values, DEFAULT_BRUTE_FORCE_CAP};
use crate::numerics::{bracket_root, char_poly, spectral_radius, IntPolynomial, Matrix, Mode, RootBracket, Scalar, SpectralInterval};
use crate::system::{System, Vector};
use crate::trees::{BinaryTree, LeafPath, Side};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 5_000_000;

// Widening applied to the rate endpoints after taking an f64 root.
const ROOT_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPattern {
    tree: BinaryTree,
    mark: LeafPath,
    matrix: Matrix,
}

impl LinearPattern {
    pub fn new(sys: &System, tree: BinaryTree, mark: LeafPath) -> Result<Self> {
        if tree.leaves() < 2 {
            return Err(Error::Domain("a pattern needs at least two leaves".into()));
        }
        let matrix = build_matrix(sys, &tree, &mark)?;
        Ok(LinearPattern { tree, mark, matrix })
    }

    /// The 2-leaf pattern `(ss)` marked on `side`.
    pub fn pair(sys: &System, side: Side) -> Self {
        Self::new(sys, BinaryTree::node(BinaryTree::leaf(), BinaryTree::leaf()), LeafPath::new(vec![side]))
            .expect("valid 2-leaf pattern")
    }

    pub fn tree(&self) -> &BinaryTree {
        &self.tree
    }

    pub fn mark(&self) -> &LeafPath {
        &self.mark
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn leaves(&self) -> usize {
        self.tree.leaves()
    }

    /// Order used for canonical witnesses: tree text, then mark.
    fn cmp_witness(&self, other: &LinearPattern) -> Ordering {
        self.tree.cmp_text(&other.tree).then_with(|| self.mark.cmp(&other.mark))
    }
}

/// `M` with `eval(tree, mark := u) = M u`: the product, root first, of the
/// slice matrices of the sibling subtrees along the path to the mark.
pub fn build_matrix(sys: &System, tree: &BinaryTree, mark: &LeafPath) -> Result<Matrix> {
    tree.check_leaf_path(mark)?;
    let mut m = Matrix::identity(sys.dim(), sys.mode());
    let mut node = tree;
    for &side in mark.steps() {
        let (l, r) = node.children().expect("validated path");
        let slice = match side {
            Side::L => sys.left_slice(&r.eval(sys))?,
            Side::R => sys.right_slice(&l.eval(sys))?,
        };
        m = m.mul(&slice)?;
        node = if side == Side::L { l } else { r };
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternReport {
    pub pattern: LinearPattern,
    pub rho: SpectralInterval,
    /// `(lo, hi)` enclosing `ρ^(1/(leaves-1))`.
    pub rate: (f64, f64),
    /// Characteristic polynomial of `M` when it has integer entries.
    pub certificate: Option<IntPolynomial>,
    pub bracket: Option<RootBracket>,
}

impl Serialize for PatternReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PatternReport", 7)?;
        st.serialize_field("tree", &self.pattern.tree.to_string())?;
        st.serialize_field("mark", &self.pattern.mark.to_string())?;
        st.serialize_field("rho", &[self.rho.lo, self.rho.hi])?;
        st.serialize_field("rate", &[self.rate.0, self.rate.1])?;
        st.serialize_field("leaves", &self.pattern.leaves())?;
        st.serialize_field("char_poly", &self.certificate)?;
        st.serialize_field("root_bracket", &self.bracket)?;
        st.end()
    }
}

fn root_interval(rho: &SpectralInterval, k: usize) -> (f64, f64) {
    if k == 1 {
        return (rho.lo, rho.hi);
    }
    let e = 1.0 / k as f64;
    ((rho.lo.powf(e) * (1.0 - ROOT_SLACK)).max(0.0), rho.hi.powf(e) * (1.0 + ROOT_SLACK))
}

pub fn pattern_rate(sys: &System, p: &LinearPattern, tol: f64) -> Result<PatternReport> {
    sys.require_nonneg("certified pattern rates")?;
    let rho = spectral_radius(&p.matrix, tol)?;
    let rate = root_interval(&rho, p.leaves() - 1);
    let certificate = if p.matrix.is_integer() { Some(char_poly(&p.matrix)?) } else { None };
    let bracket = certificate.as_ref().map(|c| bracket_root(c, &rho));
    Ok(PatternReport { pattern: p.clone(), rho, rate, certificate, bracket })
}

/// `p1` with its mark replaced by `p2`; the matrix is `M(p1) M(p2)`.
pub fn compose(p1: &LinearPattern, p2: &LinearPattern) -> Result<LinearPattern> {
    if p1.matrix.rows() != p2.matrix.rows() {
        return Err(Error::Shape("patterns of different dimensions".into()));
    }
    Ok(LinearPattern {
        tree: p1.tree.replace(&p1.mark, &p2.tree)?,
        mark: p1.mark.concat(&p2.mark),
        matrix: p1.matrix.mul(&p2.matrix)?,
    })
}

/// Wraps `p` under a new root whose other child is `sibling`.
pub fn wrap(sys: &System, p: &LinearPattern, sibling: &BinaryTree, side: Side) -> Result<LinearPattern> {
    let v = sibling.eval(sys);
    let (tree, slice) = match side {
        Side::L => (BinaryTree::node(p.tree.clone(), sibling.clone()), sys.left_slice(&v)?),
        Side::R => (BinaryTree::node(sibling.clone(), p.tree.clone()), sys.right_slice(&v)?),
    };
    Ok(LinearPattern { tree, mark: p.mark.prepend(side), matrix: slice.mul(&p.matrix)? })
}

/// Turns `p` into a pattern whose `(j, j)` entry is at least `alpha * M(p)[i][j]`,
/// following `path` (a walk `j = path[0] -> ... -> path[last] = i` in the
/// dependency graph) and wrapping one sibling leaf per edge. Indices are 0-based.
pub fn close_via_path(
    sys: &System,
    p: &LinearPattern,
    i: usize,
    j: usize,
    path: &[usize],
) -> Result<(LinearPattern, Scalar)> {
    sys.require_nonneg("path closure")?;
    let d = sys.dim();
    if i >= d || j >= d {
        return Err(Error::Domain(format!("index out of range for dimension {d}")));
    }
    let path: Vec<usize> = if path.is_empty() { vec![j] } else { path.to_vec() };
    if path[0] != j || *path.last().unwrap() != i {
        return Err(Error::Domain(format!("path must run from {} to {}", j + 1, i + 1)));
    }
    let mut steps = Vec::with_capacity(path.len() - 1);
    for e in path.windows(2) {
        let (k, t) = (e[0], e[1]);
        if k >= d || t >= d {
            return Err(Error::Domain(format!("path vertex out of range for dimension {d}")));
        }
        let left = sys.terms().iter().any(|c| c.k == k && c.i == t && c.c.is_positive());
        let right = sys.terms().iter().any(|c| c.k == k && c.j == t && c.c.is_positive());
        let side = match (left, right) {
            (true, _) => Side::L,
            (false, true) => Side::R,
            _ => return Err(Error::Domain(format!("{} -> {} is not an edge", k + 1, t + 1))),
        };
        steps.push((k, t, side));
    }
    let leaf = BinaryTree::leaf();
    let mut cur = p.clone();
    let mut alpha = Scalar::one(sys.mode());
    for &(k, t, side) in steps.iter().rev() {
        cur = wrap(sys, &cur, &leaf, side)?;
        let slice = match side {
            Side::L => sys.left_slice(sys.start())?,
            Side::R => sys.right_slice(sys.start())?,
        };
        alpha = &alpha * slice.get(k, t);
    }
    Ok((cur, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Beam(usize),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Exhaustive => f.write_str("exhaustive"),
            Strategy::Beam(w) => write!(f, "beam:{w}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exhaustive" {
            return Ok(Strategy::Exhaustive);
        }
        match s.strip_prefix("beam:").map(str::parse::<usize>) {
            Some(Ok(w)) if w > 0 => Ok(Strategy::Beam(w)),
            _ => Err(Error::parse("strategy", format!("expected `exhaustive` or `beam:W` with W >= 1, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub tol: f64,
    /// Maximum number of candidate patterns generated.
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { tol: DEFAULT_TOL, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternSearch {
    pub strategy: String,
    pub max_leaves: usize,
    /// Candidates generated before deduplication.
    pub candidates: usize,
    /// Distinct patterns, best first.
    pub ranked: Vec<PatternReport>,
}

impl PatternSearch {
    pub fn best(&self) -> Option<&PatternReport> {
        self.ranked.first()
    }
}

/// Ranking: larger certified rate, then fewer leaves, then tree text, then mark.
fn rank(a: &PatternReport, b: &PatternReport) -> Ordering {
    b.rate
        .0
        .total_cmp(&a.rate.0)
        .then(a.pattern.leaves().cmp(&b.pattern.leaves()))
        .then_with(|| a.pattern.cmp_witness(&b.pattern))
}

type Level = HashMap<Matrix, LinearPattern>;

fn offer(level: &mut Level, p: LinearPattern) {
    match level.get_mut(&p.matrix) {
        Some(cur) => {
            if p.cmp_witness(cur).is_lt() {
                *cur = p;
            }
        }
        None => {
            level.insert(p.matrix.clone(), p);
        }
    }
}

fn score(sys: &System, level: Level, tol: f64) -> Result<Vec<PatternReport>> {
    let mut pats: Vec<LinearPattern> = level.into_values().collect();
    pats.sort_by(|a, b| a.cmp_witness(b));
    pats.par_iter().map(|p| pattern_rate(sys, p, tol)).collect()
}

fn finish(strategy: Strategy, max_leaves: usize, candidates: usize, mut ranked: Vec<PatternReport>) -> PatternSearch {
    ranked.sort_by(rank);
    PatternSearch { strategy: strategy.to_string(), max_leaves, candidates, ranked }
}

pub fn search_patterns(sys: &System, max_leaves: usize, strategy: Strategy) -> Result<PatternSearch> {
    search_patterns_with(sys, max_leaves, strategy, &SearchOptions::default())
}

pub fn search_patterns_with(
    sys: &System,
    max_leaves: usize,
    strategy: Strategy,
    opts: &SearchOptions,
) -> Result<PatternSearch> {
    sys.require_nonneg("pattern search")?;
    if max_leaves < 2 {
        return Err(Error::Domain("max_leaves must be at least 2".into()));
    }
    match strategy {
        Strategy::Exhaustive => exhaustive(sys, max_leaves, opts),
        Strategy::Beam(w) => beam(sys, max_leaves, w, opts),
    }
}

/// Every (tree, mark) pair up to `max_leaves`, deduplicated by matrix per
/// leaf count. Built level by level: a pattern with `n` leaves is a pattern
/// with `m` leaves wrapped by a sibling whose value is any vector of `A_(n-m)`.
fn exhaustive(sys: &System, max_leaves: usize, opts: &SearchOptions) -> Result<PatternSearch> {
    let strategy = Strategy::Exhaustive;
    let values = distinct_values(sys, max_leaves - 1, DEFAULT_BRUTE_FORCE_CAP)?;
    let slices: Vec<Vec<(Matrix, Matrix, &BinaryTree)>> = values
        .iter()
        .map(|lvl| {
            lvl.iter()
                .map(|(v, t)| Ok((sys.left_slice(v)?, sys.right_slice(v)?, t)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // levels[m - 1]: marked patterns with m leaves (m = 1 is the bare mark).
    let mut levels: Vec<Vec<LinearPattern>> = vec![vec![LinearPattern {
        tree: BinaryTree::leaf(),
        mark: LeafPath::root(),
        matrix: Matrix::identity(sys.dim(), sys.mode()),
    }]];
    let mut ranked = Vec::new();
    let mut candidates = 0usize;
    for n in 2..=max_leaves {
        let mut level = Level::new();
        for m in 1..n {
            for p in &levels[m - 1] {
                for (ls, rs, t) in &slices[n - m - 1] {
                    candidates += 2;
                    if candidates > opts.budget {
                        let partial = finish(strategy, max_leaves, candidates, ranked);
                        return Err(Error::SearchBudget { budget: opts.budget, partial: Box::new(partial) });
                    }
                    offer(
                        &mut level,
                        LinearPattern {
                            tree: BinaryTree::node(p.tree.clone(), (*t).clone()),
                            mark: p.mark.prepend(Side::L),
                            matrix: ls.mul(&p.matrix)?,
                        },
                    );
                    offer(
                        &mut level,
                        LinearPattern {
                            tree: BinaryTree::node((*t).clone(), p.tree.clone()),
                            mark: p.mark.prepend(Side::R),
                            matrix: rs.mul(&p.matrix)?,
                        },
                    );
                }
            }
        }
        let mut pats: Vec<LinearPattern> = level.values().cloned().collect();
        pats.sort_by(|a, b| a.cmp_witness(b));
        ranked.extend(score(sys, level, opts.tol)?);
        levels.push(pats);
    }
    Ok(finish(strategy, max_leaves, candidates, ranked))
}

/// Grows patterns by composition and by wrapping with siblings of one or two
/// leaves, keeping the best `width` per leaf count.
fn beam(sys: &System, max_leaves: usize, width: usize, opts: &SearchOptions) -> Result<PatternSearch> {
    let strategy = Strategy::Beam(width);
    let siblings = [BinaryTree::leaf(), BinaryTree::node(BinaryTree::leaf(), BinaryTree::leaf())];
    // kept[n]: the beam at n leaves (indices 0 and 1 unused).
    let mut kept: Vec<Vec<LinearPattern>> = vec![Vec::new(); max_leaves + 1];
    let mut ranked = Vec::new();
    let mut candidates = 0usize;
    for n in 2..=max_leaves {
        let mut level = Level::new();
        let mut push = |level: &mut Level, p: LinearPattern, ranked: &Vec<PatternReport>| -> Result<()> {
            candidates += 1;
            if candidates > opts.budget {
                let partial = finish(strategy, max_leaves, candidates, ranked.clone());
                return Err(Error::SearchBudget { budget: opts.budget, partial: Box::new(partial) });
            }
            offer(level, p);
            Ok(())
        };
        if n == 2 {
            for side in [Side::L, Side::R] {
                push(&mut level, LinearPattern::pair(sys, side), &ranked)?;
            }
        }
        for a in 2..n {
            let b = n + 1 - a;
            if b < 2 {
                continue;
            }
            for p1 in &kept[a] {
                for p2 in &kept[b] {
                    push(&mut level, compose(p1, p2)?, &ranked)?;
                }
            }
        }
        for sib in &siblings {
            let m = sib.leaves();
            if n > m + 1 {
                for p in &kept[n - m] {
                    for side in [Side::L, Side::R] {
                        push(&mut level, wrap(sys, p, sib, side)?, &ranked)?;
                    }
                }
            }
        }
        let mut scored = score(sys, level, opts.tol)?;
        scored.sort_by(rank);
        kept[n] = scored.iter().take(width).map(|r| r.pattern.clone()).collect();
        ranked.extend(scored);
    }
    Ok(finish(strategy, max_leaves, candidates, ranked))
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceRates {
    /// `(t, h(t)^(1/t))` for `t = 1..=t_max`.
    pub rates: Vec<(usize, f64)>,
    /// Set when exact values grew past the switch threshold and the tail was
    /// computed in log-domain floating point.
    pub log_domain: bool,
}

// Natural-log size beyond which exact iteration hands over to log-domain floats.
const LOG_SWITCH: f64 = 20_000.0;

/// `h(t)`, the largest entry of `M^t s` (the value of `T^t`), as `h(t)^(1/t)`.
pub fn pattern_sequence_rates(sys: &System, p: &LinearPattern, t_max: usize) -> Result<SequenceRates> {
    sys.require_nonneg("pattern sequence rates")?;
    let mut m = p.matrix.clone();
    let mut v: Vec<Scalar> = sys.start().entries().to_vec();
    let mut log_domain = false;
    let mut rates = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        v = m.mul_vec(&v)?;
        let h = Vector::new(v.clone()).max_entry().cloned().expect("dim >= 1");
        rates.push((t, if h.is_zero() { 0.0 } else { (h.ln_abs() / t as f64).exp() }));
        if !log_domain && h.mode() == Mode::Exact && h.ln_abs() > LOG_SWITCH {
            log_domain = true;
            m = m.to_mode(Mode::Float);
            v = v.iter().map(|x| x.to_mode(Mode::Float)).collect();
        }
    }
    Ok(SequenceRates { rates, log_domain })
}
