//! The dependency digraph on coordinates: `k -> i` when output `k` draws on
//! input coordinate `i` through some coefficient, with the side recorded.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::GrowthTable;
use crate::numerics::Scalar;
use crate::system::{System, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Some `c[from][to][j]` is nonzero.
    pub left: bool,
    /// Some `c[from][j][to]` is nonzero.
    pub right: bool,
}

impl Edge {
    pub fn label(&self) -> &'static str {
        match (self.left, self.right) {
            (true, true) => "LR",
            (true, false) => "L",
            _ => "R",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    dim: usize,
    edges: Vec<Edge>,
    /// Strongly connected components (sorted vertices), ordered by smallest vertex.
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    /// `greater[a][b]`: component `a` reaches component `b` (`a != b`).
    greater: Vec<Vec<bool>>,
    /// Built on nonzero rather than positive coefficients.
    pub advisory: bool,
}

pub fn build_graph(sys: &System) -> DependencyGraph {
    let d = sys.dim();
    let mut flags = vec![vec![(false, false); d]; d];
    for t in sys.terms() {
        flags[t.k][t.i].0 = true;
        flags[t.k][t.j].1 = true;
    }
    let mut edges = Vec::new();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..d).map(|_| g.add_node(())).collect();
    for (k, row) in flags.iter().enumerate() {
        for (i, &(left, right)) in row.iter().enumerate() {
            if left || right {
                edges.push(Edge { from: k, to: i, left, right });
                g.add_edge(nodes[k], nodes[i], ());
            }
        }
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    components.sort();
    let mut component_of = vec![0; d];
    for (ci, c) in components.iter().enumerate() {
        for &v in c {
            component_of[v] = ci;
        }
    }
    let nc = components.len();
    let mut greater = vec![vec![false; nc]; nc];
    for e in &edges {
        let (a, b) = (component_of[e.from], component_of[e.to]);
        if a != b {
            greater[a][b] = true;
        }
    }
    // Transitive closure.
    for m in 0..nc {
        for a in 0..nc {
            if greater[a][m] {
                let via = greater[m].clone();
                for (g, v) in greater[a].iter_mut().zip(via) {
                    *g |= v;
                }
            }
        }
    }
    DependencyGraph { dim: d, edges, components, component_of, greater, advisory: !sys.is_nonneg() }
}

impl DependencyGraph {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_of[v]
    }

    /// Whether component `a` is greater than component `b`.
    pub fn greater(&self, a: usize, b: usize) -> bool {
        self.greater[a][b]
    }

    /// Pairs `(a, b)` with `a > b`, sorted.
    pub fn order(&self) -> Vec<(usize, usize)> {
        let n = self.components.len();
        (0..n)
            .flat_map(|a| (0..n).filter(move |&b| self.greater[a][b]).map(move |b| (a, b)))
            .collect()
    }

    /// No component is both above and below another.
    pub fn is_antisymmetric(&self) -> bool {
        let n = self.components.len();
        (0..n).all(|a| !self.greater[a][a] && (0..n).all(|b| !(self.greater[a][b] && self.greater[b][a])))
    }

    pub fn maximal_components(&self) -> Vec<usize> {
        let n = self.components.len();
        (0..n).filter(|&b| (0..n).all(|a| !self.greater[a][b])).collect()
    }

    /// Vertices of `c` and every component below it, sorted.
    pub fn closure(&self, c: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = self.components[c].iter().copied().collect();
        for (b, comp) in self.components.iter().enumerate() {
            if self.greater[c][b] {
                out.extend(comp.iter().copied());
            }
        }
        out.into_iter().collect()
    }

    /// `{"components": [[1-based vertices]], "order": [[a, b]]}` with 1-based component ids.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Report {
            components: Vec<Vec<usize>>,
            order: Vec<[usize; 2]>,
            advisory: bool,
        }
        serde_json::to_value(Report {
            components: self.components.iter().map(|c| c.iter().map(|v| v + 1).collect()).collect(),
            order: self.order().into_iter().map(|(a, b)| [a + 1, b + 1]).collect(),
            advisory: self.advisory,
        })
        .expect("serializable")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependency {\n");
        for (ci, c) in self.components.iter().enumerate() {
            writeln!(out, "  subgraph cluster_{} {{", ci + 1).unwrap();
            writeln!(out, "    label=\"C{}\";", ci + 1).unwrap();
            for v in c {
                writeln!(out, "    {};", v + 1).unwrap();
            }
            out.push_str("  }\n");
        }
        for e in &self.edges {
            writeln!(out, "  {} -> {} [label=\"{}\"];", e.from + 1, e.to + 1, e.label()).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// The system restricted to component `c` and everything below it, plus
/// the table mapping new indices to original ones.
pub fn extract_subsystem(sys: &System, graph: &DependencyGraph, c: usize) -> Result<(System, Vec<usize>)> {
    if c >= graph.components.len() {
        return Err(Error::Domain(format!("no component {} (graph has {})", c + 1, graph.components.len())));
    }
    let keep = graph.closure(c);
    let mut new_index = vec![usize::MAX; sys.dim()];
    for (n, &o) in keep.iter().enumerate() {
        new_index[o] = n;
    }
    let start = Vector::new(keep.iter().map(|&o| sys.start()[o].clone()).collect());
    // The kept set is closed under dependency, so a term whose output is
    // kept only mentions kept inputs.
    let terms = sys.terms().iter().filter(|t| new_index[t.k] != usize::MAX).map(|t| {
        let mut t = t.clone();
        t.k = new_index[t.k];
        t.i = new_index[t.i];
        t.j = new_index[t.j];
        t
    });
    Ok((System::new(keep.len(), start, terms)?, keep))
}

#[derive(Debug, Clone, Serialize)]
pub struct TopComponentReport {
    /// `None` when the graph has several maximal components.
    pub component: Option<Vec<usize>>,
    /// `(vertex, min_n g_i(n) / g(n))`, 1-based vertices, over `n` with `g(n) > 0`.
    pub min_ratios: Vec<(usize, f64)>,
    pub skipped: Option<String>,
}

impl TopComponentReport {
    pub fn bounded_away_from_zero(&self) -> bool {
        self.min_ratios.iter().all(|&(_, r)| r > 0.0)
    }
}

pub fn top_component_check(graph: &DependencyGraph, table: &GrowthTable) -> TopComponentReport {
    let maximal = graph.maximal_components();
    if maximal.len() != 1 {
        return TopComponentReport {
            component: None,
            min_ratios: Vec::new(),
            skipped: Some(format!("{} maximal components", maximal.len())),
        };
    }
    let comp = &graph.components[maximal[0]];
    let min_ratios = comp
        .iter()
        .map(|&i| {
            let r = (1..=table.max_n())
                .filter(|&n| table.g(n).is_positive())
                .map(|n| (table.g_i(n, i).ln_abs() - table.g(n).ln_abs()).exp())
                .fold(f64::INFINITY, f64::min);
            (i + 1, r)
        })
        .collect();
    TopComponentReport { component: Some(comp.iter().map(|v| v + 1).collect()), min_ratios, skipped: None }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeViolation {
    pub from: usize,
    pub to: usize,
    pub partner: usize,
    pub n: usize,
}

/// For each edge `k -> i` with a witness coefficient `c` (partner index `j`),
/// checks `g_k(n+1) >= c s_j g_i(n)`: attach a single leaf beside the tree
/// that maximizes entry `i`. Indices in violations are 1-based.
pub fn edge_inequality_check(sys: &System, table: &GrowthTable) -> Result<Vec<EdgeViolation>> {
    sys.require_nonneg("the edge inequality check")?;
    let s = sys.start();
    let mut out = Vec::new();
    for t in sys.terms() {
        for (target, partner) in [(t.i, t.j), (t.j, t.i)] {
            let factor: Scalar = &t.c * &s[partner];
            for n in 1..table.max_n() {
                if *table.g_i(n + 1, t.k) < &factor * table.g_i(n, target) {
                    out.push(EdgeViolation { from: t.k + 1, to: target + 1, partner: partner + 1, n });
                }
            }
        }
    }
    Ok(out)
}
