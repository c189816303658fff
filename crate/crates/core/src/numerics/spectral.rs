//! Certified spectral radius of nonnegative matrices.
//!
//! The support digraph is split into strongly connected components. The
//! spectral radius is the largest over the irreducible diagonal blocks; each
//! nontrivial block is handled by power iteration on `block + I` with
//! Collatz–Wielandt bounds.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

// Relative widening applied to each Collatz–Wielandt ratio to absorb
// floating-point rounding in the matrix-vector product.
const ROUNDING_SLACK: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl SpectralInterval {
    pub fn exact(value: f64) -> Self {
        SpectralInterval { lo: value, hi: value, iterations: 0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

pub fn spectral_radius(m: &Matrix, tol: f64) -> Result<SpectralInterval> {
    spectral_radius_with_cap(m, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn spectral_radius_with_cap(m: &Matrix, tol: f64, max_iterations: usize) -> Result<SpectralInterval> {
    if !m.is_square() {
        return Err(Error::Shape("spectral radius of a non-square matrix".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(neg) = m.entries().find(|x| x.is_negative()) {
        return Err(Error::Domain(format!("negative entry {neg}")));
    }
    let a = m.to_f64();
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("entries exceed the f64 range".into()));
    }
    let n = a.len();

    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if a[i][j] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let mut best = SpectralInterval::exact(0.0);
    let mut total_iterations = 0;
    for comp in tarjan_scc(&g) {
        let idx: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        let block = if idx.len() == 1 {
            SpectralInterval::exact(a[idx[0]][idx[0]])
        } else {
            let sub: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| a[i][j]).collect())
                .collect();
            match irreducible_block(&sub, tol, max_iterations) {
                Ok(iv) => iv,
                Err(Error::Convergence { iterations, best: partial }) => {
                    return Err(Error::Convergence {
                        iterations: total_iterations + iterations,
                        best: SpectralInterval {
                            lo: best.lo.max(partial.lo),
                            hi: best.hi.max(partial.hi),
                            iterations: total_iterations + iterations,
                        },
                    })
                }
                Err(e) => return Err(e),
            }
        };
        total_iterations += block.iterations;
        best.lo = best.lo.max(block.lo);
        best.hi = best.hi.max(block.hi);
    }
    best.iterations = total_iterations;
    Ok(best)
}

/// Power iteration on `b + I` from the all-ones vector.
fn irreducible_block(b: &[Vec<f64>], tol: f64, max_iterations: usize) -> Result<SpectralInterval> {
    let n = b.len();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut best = SpectralInterval { lo: 0.0, hi: f64::INFINITY, iterations: 0 };
    for it in 1..=max_iterations {
        for i in 0..n {
            y[i] = x[i] + b[i].iter().zip(&x).map(|(a, v)| a * v).sum::<f64>();
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r * (1.0 - ROUNDING_SLACK));
            hi = hi.max(r * (1.0 + ROUNDING_SLACK));
        }
        let lo = (lo - 1.0).max(0.0);
        let hi = hi - 1.0;
        best.lo = best.lo.max(lo);
        best.hi = best.hi.min(hi);
        best.iterations = it;
        if best.hi - best.lo <= tol {
            return Ok(best);
        }
        let scale = y.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            x[i] = y[i] / scale;
        }
        if x.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            // Entries underflowed; the ratios are no longer meaningful.
            break;
        }
    }
    Err(Error::Convergence { iterations: best.iterations, best })
}
