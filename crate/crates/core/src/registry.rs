//! Built-in example systems and the facts expected of each.

use num_bigint::BigInt;
use serde::Serialize;

use crate::bounds::upper_bound;
use crate::error::{Error, Result};
use crate::growth::{brute_force, frontier_dp, growth_table, table_from_frontiers, Norm};
use crate::numerics::Scalar;
use crate::patterns::{pattern_rate, search_patterns, LinearPattern, Strategy};
use crate::system::{System, Vector};
use crate::trees::{enumerate_trees, BinaryTree, Side};

pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

impl Example {
    pub fn system(&self) -> System {
        System::parse(self.source.as_bytes()).expect("built-in systems parse")
    }
}

pub const EXAMPLES: &[Example] = &[
    Example {
        name: "fibonacci",
        summary: "x*y = (x1 y2 + x2 y1, x1 y2), s = (1, 1); g_1(n) = F(n+1), g_2(n) = F(n)",
        source: r#"{"dim":2,"s":["1","1"],"coeffs":[{"k":1,"i":1,"j":2,"c":"1"},{"k":1,"i":2,"j":1,"c":"1"},{"k":2,"i":1,"j":2,"c":"1"}]}"#,
    },
    Example {
        name: "doubling",
        summary: "x*y = (x1 y1 + x2 y2, x2 y2), s = (1, 1); g(2^k) = a_k with a_(k+1) = 1 + a_k^2",
        source: r#"{"dim":2,"s":["1","1"],"coeffs":[{"k":1,"i":1,"j":1,"c":"1"},{"k":1,"i":2,"j":2,"c":"1"},{"k":2,"i":2,"j":2,"c":"1"}]}"#,
    },
    Example {
        name: "constant-n1",
        summary: "x*y = (x1 y2 + x2 y1, x2 y2), s = (1, 1); every n-leaf tree gives (n, 1)",
        source: r#"{"dim":2,"s":["1","1"],"coeffs":[{"k":1,"i":1,"j":2,"c":"1"},{"k":1,"i":2,"j":1,"c":"1"},{"k":2,"i":2,"j":2,"c":"1"}]}"#,
    },
    Example {
        name: "period3",
        summary: "x*y = (x2 y2, x1 y1), s = (1, 0); g(n) = 0 when 3 | n, else 1",
        source: r#"{"dim":2,"s":["1","0"],"coeffs":[{"k":1,"i":2,"j":2,"c":"1"},{"k":2,"i":1,"j":1,"c":"1"}]}"#,
    },
    Example {
        name: "signed-s",
        summary: "x*y = (x1 y1, x2 y2, 3 x1 y3 + 3 x2 y3), s = (1, -1, 1); g(n) = 1 (n even), 6^((n-1)/2) (n odd)",
        source: r#"{"dim":3,"s":["1","-1","1"],"coeffs":[{"k":1,"i":1,"j":1,"c":"1"},{"k":2,"i":2,"j":2,"c":"1"},{"k":3,"i":1,"j":3,"c":"3"},{"k":3,"i":2,"j":3,"c":"3"}]}"#,
    },
    Example {
        name: "signed-coeff",
        summary: "x*y = (x1 y1, -x2 y2, 3 x1 y3 - 3 x2 y3), s = (1, 1, 1); same g as signed-s",
        source: r#"{"dim":3,"s":["1","1","1"],"coeffs":[{"k":1,"i":1,"j":1,"c":"1"},{"k":2,"i":2,"j":2,"c":"-1"},{"k":3,"i":1,"j":3,"c":"3"},{"k":3,"i":2,"j":3,"c":"-3"}]}"#,
    },
    Example {
        name: "open-problem",
        summary: "x*y = (x1 y1 + x2 y2, x1 y1), s = (1, 1); a 3-leaf pattern has rate (1 + sqrt 3)^(1/2) > golden ratio",
        source: r#"{"dim":2,"s":["1","1"],"coeffs":[{"k":1,"i":1,"j":1,"c":"1"},{"k":1,"i":2,"j":2,"c":"1"},{"k":2,"i":1,"j":1,"c":"1"}]}"#,
    },
];

pub fn lookup(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub example: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

struct Checks {
    example: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn push(&mut self, check: &str, passed: bool, detail: impl Into<String>) {
        self.out.push(Check { example: self.example.into(), check: check.into(), passed, detail: detail.into() });
    }
}

pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// `F(0..=n)` with `F(0) = 0`, `F(1) = 1`.
pub fn fibonacci_numbers(n: usize) -> Vec<BigInt> {
    let mut f = vec![BigInt::from(0), BigInt::from(1)];
    while f.len() <= n {
        let next = &f[f.len() - 1] + &f[f.len() - 2];
        f.push(next);
    }
    f.truncate(n + 1);
    f
}

fn int(x: &Scalar) -> Option<BigInt> {
    x.as_integer()
}

fn check_sequence(c: &mut Checks, name: &str, got: Vec<Option<BigInt>>, want: Vec<BigInt>) {
    match got.iter().zip(&want).position(|(g, w)| g.as_ref() != Some(w)) {
        None => c.push(name, true, format!("{} values match", want.len())),
        Some(p) => c.push(
            name,
            false,
            format!("first mismatch at n = {}: got {:?}, expected {}", p + 1, got[p], want[p]),
        ),
    }
}

/// Runs every expectation for `name`.
pub fn verify(name: &str) -> Result<Vec<Check>> {
    let ex = lookup(name).ok_or_else(|| Error::Domain(format!("unknown example `{name}`")))?;
    let sys = ex.system();
    let mut c = Checks { example: ex.name, out: Vec::new() };
    match ex.name {
        "fibonacci" => {
            let t = growth_table(&sys, 30)?;
            let f = fibonacci_numbers(31);
            check_sequence(&mut c, "g_1(n) = F(n+1), n <= 30", (1..=30).map(|n| int(t.g_i(n, 0))).collect(), f[2..=31].to_vec());
            check_sequence(&mut c, "g_2(n) = F(n), n <= 30", (1..=30).map(|n| int(t.g_i(n, 1))).collect(), f[1..=30].to_vec());
            let r = pattern_rate(&sys, &LinearPattern::pair(&sys, Side::L), 1e-9)?;
            c.push("pattern (ss) marked L has rate golden ratio", r.rate.0 <= GOLDEN_RATIO && GOLDEN_RATIO <= r.rate.1, format!("{:?}", r.rate));
            let u = upper_bound(&sys, Some(&Vector::from_ints(&[2, 1])))?;
            c.push("w = (2, 1) certifies upper bound 2", u.exact == "2" && u.certificate.check(&sys), u.exact);
        }
        "doubling" => {
            let frontiers = frontier_dp(&sys, 32)?;
            let t = table_from_frontiers(&sys, &frontiers);
            let a: Vec<BigInt> = [1u64, 2, 5, 26, 677, 458_330].iter().map(|&v| BigInt::from(v)).collect();
            check_sequence(&mut c, "g(2^k) = a_k, k <= 5", (0..=5).map(|k| int(t.g(1 << k))).collect(), a);
            let perfect = (0..=5u32).all(|k| *t.witness(1 << k, 0) == BinaryTree::perfect(k));
            c.push("witnesses of g(2^k) are perfect trees", perfect, "");
            let best = search_patterns(&sys, 9, Strategy::Exhaustive)?.best().map_or(0.0, |r| r.rate.0);
            let table_best = (1..=8).map(|m| t.g(m).root_f64(m)).fold(0.0, f64::max);
            c.push(
                "best pattern rate (<= 9 leaves) = max_{m<=8} g(m)^(1/m) < 1.5029",
                (best - table_best).abs() < 1e-9 && best < 1.5029,
                format!("{best:.12} vs {table_best:.12}"),
            );
        }
        "constant-n1" => {
            let target = |n: usize| Vector::from_ints(&[n as i64, 1]);
            let mut all = true;
            for n in 1..=8 {
                for tree in enumerate_trees(n)? {
                    all &= tree.eval(&sys) == target(n);
                }
            }
            c.push("every tree with n <= 8 leaves gives (n, 1)", all, "");
            let f = frontier_dp(&sys, 16)?;
            c.push(
                "frontier size 1 for n <= 16",
                f.iter().all(|f| f.len() == 1 && f.entries()[0].vector == target(f.n)),
                "",
            );
        }
        "period3" => {
            let t = brute_force(&sys, 12, Norm::MaxAbs)?;
            let want = (1..=12).map(|n| BigInt::from(u8::from(n % 3 != 0))).collect();
            check_sequence(&mut c, "g = 1, 1, 0 repeating, n <= 12", (1..=12).map(|n| int(t.g(n))).collect(), want);
        }
        "signed-s" | "signed-coeff" => {
            let t = brute_force(&sys, 11, Norm::MaxAbs)?;
            let want = (1..=11u32)
                .map(|n| if n % 2 == 0 { BigInt::from(1) } else { BigInt::from(6).pow((n - 1) / 2) })
                .collect();
            check_sequence(&mut c, "g(n) = 1 (even), 6^((n-1)/2) (odd), n <= 11", (1..=11).map(|n| int(t.g(n))).collect(), want);
        }
        "open-problem" => {
            let expected = (1.0 + 3f64.sqrt()).sqrt();
            let best = search_patterns(&sys, 3, Strategy::Exhaustive)?;
            let lo = best.best().map_or(0.0, |r| r.rate.0);
            c.push(
                "3-leaf search certifies (1 + sqrt 3)^(1/2) > golden ratio",
                (lo - expected).abs() < 1e-6 && lo > GOLDEN_RATIO,
                format!("{lo:.12}"),
            );
            let t = brute_force(&sys, 6, Norm::MaxAbs)?;
            let increasing = (1..6).all(|n| t.g(n + 1) > t.g(n));
            c.push("g strictly increasing for n <= 6, g(2) = 2", increasing && *t.g(2) == Scalar::from_int(2), "");
        }
        _ => unreachable!("every registry entry has expectations"),
    }
    Ok(c.out)
}
