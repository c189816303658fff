//! Growth rates of bilinear maps.
//!
//! A system `(*, s)` combines `n` copies of a start vector `s` through `n - 1`
//! applications of a bilinear map. This crate computes the exact per-entry
//! maxima `g_i(n)` over all such combinations, searches linear patterns for
//! certified lower bounds on the growth rate, produces Lyapunov-weight upper
//! bounds, and analyzes the coordinate dependency graph.

pub mod bounds;
pub mod cache;
pub mod depgraph;
pub mod error;
pub mod growth;
pub mod numerics;
pub mod patterns;
pub mod registry;
pub mod system;
pub mod trees;

pub use error::{Error, Result};
