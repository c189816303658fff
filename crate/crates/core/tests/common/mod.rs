//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use bilgrowth::numerics::Scalar;
use bilgrowth::system::{System, Vector};
use bilgrowth::trees::BinaryTree;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fib(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

/// Values of every tree with `n` leaves, one entry per tree (no deduplication).
pub fn all_tree_values(sys: &System, max_n: usize) -> Vec<Vec<Vector>> {
    let mut levels: Vec<Vec<Vector>> = vec![vec![sys.start().clone()]];
    for n in 2..=max_n {
        let mut level = Vec::new();
        for m in 1..n {
            for x in &levels[m - 1] {
                for y in &levels[n - m - 1] {
                    level.push(sys.apply(x, y).unwrap());
                }
            }
        }
        levels.push(level);
    }
    levels
}

/// `g_i(n)` as the largest `|x_i|` over every tree, for `n = 1..=max_n`.
pub fn oracle_table(sys: &System, max_n: usize) -> Vec<Vec<Scalar>> {
    all_tree_values(sys, max_n)
        .into_iter()
        .map(|level| {
            (0..sys.dim())
                .map(|i| level.iter().map(|v| v[i].abs()).max().unwrap())
                .collect()
        })
        .collect()
}

/// Random shape with `n` leaves: the root split is uniform, then recurse.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> BinaryTree {
    if n == 1 {
        return BinaryTree::leaf();
    }
    let m = rng.gen_range(1..n);
    BinaryTree::node(random_tree(rng, m), random_tree(rng, n - m))
}

pub fn random_nonneg_system(rng: &mut ChaCha8Rng, max_dim: usize) -> System {
    loop {
        let d = rng.gen_range(1..=max_dim);
        let start: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=2)).collect();
        let mut terms = Vec::new();
        for k in 1..=d {
            for i in 1..=d {
                for j in 1..=d {
                    let c = rng.gen_range(0..=2);
                    if c > 0 && rng.gen_bool(0.4) {
                        terms.push((k, i, j, c));
                    }
                }
            }
        }
        if !terms.is_empty() {
            return System::from_ints(&start, &terms).unwrap();
        }
    }
}

/// Coefficients of `det(t I - m)`, constant term first, by Faddeev–LeVerrier.
pub fn char_poly_leverrier(m: &[Vec<i64>]) -> Vec<BigRational> {
    let n = m.len();
    let a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let mul = |x: &Vec<Vec<BigRational>>, y: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(BigRational::zero(), |acc, k| acc + &x[i][k] * &y[k][j]))
                    .collect()
            })
            .collect()
    };
    // c[n] = 1; M_0 = 0; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k) / k
    let mut c = vec![BigRational::zero(); n + 1];
    c[n] = BigRational::one();
    let mut mk: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        let mut next = mul(&a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        mk = next;
        let am = mul(&a, &mk);
        let tr = (0..n).fold(BigRational::zero(), |acc, i| acc + &am[i][i]);
        c[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    c
}

pub fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let q = r.last().unwrap() / &lead;
        let shift = r.len() - 1 - db;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &q * c;
        }
        r.pop();
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    trim(r)
}

fn sturm_chain(p: &[BigRational]) -> Vec<Vec<BigRational>> {
    let dp: Vec<BigRational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    let mut chain = vec![primitive(p.to_vec()), primitive(trim(dp))];
    loop {
        let n = chain.len();
        if chain[n - 1].len() == 1 {
            break;
        }
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        chain.push(primitive(r.into_iter().map(|c| -c).collect()));
    }
    chain
}

/// Positive multiple of `p` with coprime integer coefficients.
fn primitive(p: Vec<BigRational>) -> Vec<BigRational> {
    let den = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if content.is_zero() {
        return p;
    }
    ints.into_iter().map(|c| BigRational::from_integer(c / &content)).collect()
}

fn variations(chain: &[Vec<BigRational>], x: &BigRational) -> usize {
    let signs: Vec<i32> = chain
        .iter()
        .map(|q| {
            let v = eval(q, x);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn quotient(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigRational::zero(); a.len() - db];
    for shift in (0..q.len()).rev() {
        let c = &r[shift + db] / &b[db];
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
    }
    q
}

/// `p / gcd(p, p')`: same distinct roots, all simple.
fn square_free(p: &[BigRational]) -> Vec<BigRational> {
    let chain = sturm_chain(p);
    quotient(p, chain.last().unwrap())
}

/// Sturm chain of the square-free part of a polynomial.
pub struct Sturm(Vec<Vec<BigRational>>);

impl Sturm {
    pub fn new(p: &[BigRational]) -> Self {
        Sturm(sturm_chain(&square_free(p)))
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        variations(&self.0, a) - variations(&self.0, b)
    }
}

pub fn roots_in(p: &[BigRational], a: &BigRational, b: &BigRational) -> usize {
    Sturm::new(p).count(a, b)
}

pub fn cauchy_bound(p: &[BigRational]) -> BigRational {
    let lead = p.last().unwrap().abs();
    BigRational::one() + p[..p.len() - 1].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(BigRational::zero)
}

/// Bisects for the largest real root: returns `[a, b]` with the root in `(a, b]`
/// and `b - a <= width`.
pub fn largest_root(p: &[BigRational], width: &BigRational) -> (BigRational, BigRational) {
    let top = cauchy_bound(p);
    let sturm = Sturm::new(p);
    let mut a = -top.clone();
    let mut b = top.clone();
    assert!(sturm.count(&a, &b) > 0, "polynomial has no real root");
    while &b - &a > *width {
        let mid = (&a + &b) / BigRational::from_integer(BigInt::from(2));
        if sturm.count(&mid, &top) > 0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a, b)
}

/// Exact test that the largest real root lies in `[lo, hi]`.
pub fn largest_root_in(p: &[BigRational], lo: &BigRational, hi: &BigRational) -> bool {
    let top = cauchy_bound(p);
    let sturm = Sturm::new(p);
    let none_above = sturm.count(hi, &top) == 0;
    let some_from_lo = eval(p, lo).is_zero() || sturm.count(lo, &top) > 0;
    none_above && some_from_lo
}
