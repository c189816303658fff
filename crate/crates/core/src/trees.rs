//! Plane binary trees whose leaves all carry the start vector.
//!
//! Trees are immutable and share structure; replacing a leaf rebuilds only
//! the spine above it. The text form is `s` for a leaf and `(LR)` for a node,
//! so `((ss)s)` is the 3-leaf left comb.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::system::{System, Vector};

#[derive(Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf,
    Branch {
        left: BinaryTree,
        right: BinaryTree,
        leaves: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryTree(Arc<Node>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    L,
    R,
}

/// Steps from the root to a node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafPath(Vec<Side>);

impl LeafPath {
    pub fn root() -> Self {
        LeafPath(Vec::new())
    }

    pub fn new(steps: Vec<Side>) -> Self {
        LeafPath(steps)
    }

    pub fn steps(&self) -> &[Side] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &LeafPath) -> LeafPath {
        LeafPath(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn prepend(&self, side: Side) -> LeafPath {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(side);
        v.extend_from_slice(&self.0);
        LeafPath(v)
    }
}

impl fmt::Display for LeafPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Side::L => "L",
                Side::R => "R",
            })?;
        }
        Ok(())
    }
}

impl FromStr for LeafPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'L' => Ok(Side::L),
                'R' => Ok(Side::R),
                _ => Err(Error::Path(format!("unexpected step {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(LeafPath)
    }
}

/// One symbol of the text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Token {
    Open,
    Close,
    Leaf,
}

impl BinaryTree {
    pub fn leaf() -> Self {
        BinaryTree(Arc::new(Node::Leaf))
    }

    pub fn node(left: BinaryTree, right: BinaryTree) -> Self {
        let leaves = left.leaves() + right.leaves();
        BinaryTree(Arc::new(Node::Branch { left, right, leaves }))
    }

    pub fn leaves(&self) -> usize {
        match &*self.0 {
            Node::Leaf => 1,
            Node::Branch { leaves, .. } => *leaves,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(&*self.0, Node::Leaf)
    }

    pub fn children(&self) -> Option<(&BinaryTree, &BinaryTree)> {
        match &*self.0 {
            Node::Leaf => None,
            Node::Branch { left, right, .. } => Some((left, right)),
        }
    }

    pub fn child(&self, side: Side) -> Option<&BinaryTree> {
        self.children().map(|(l, r)| match side {
            Side::L => l,
            Side::R => r,
        })
    }

    /// Left comb with `n` leaves: `((..(ss)s)..s)`.
    pub fn left_comb(n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(BinaryTree::leaf(), |t, _| BinaryTree::node(t, BinaryTree::leaf()))
    }

    /// Right comb with `n` leaves: `(s(s(..(ss)..)))`.
    pub fn right_comb(n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(BinaryTree::leaf(), |t, _| BinaryTree::node(BinaryTree::leaf(), t))
    }

    /// Perfect tree with `2^height` leaves.
    pub fn perfect(height: u32) -> Self {
        (0..height).fold(BinaryTree::leaf(), |t, _| BinaryTree::node(t.clone(), t))
    }

    pub fn subtree(&self, path: &LeafPath) -> Result<&BinaryTree> {
        let mut cur = self;
        for (depth, &side) in path.steps().iter().enumerate() {
            cur = cur.child(side).ok_or_else(|| {
                Error::Path(format!("path {path} leaves the tree after {depth} steps"))
            })?;
        }
        Ok(cur)
    }

    /// Checks that `path` ends on a leaf.
    pub fn check_leaf_path(&self, path: &LeafPath) -> Result<()> {
        if self.subtree(path)?.is_leaf() {
            Ok(())
        } else {
            Err(Error::Path(format!("path {path} ends on an internal node")))
        }
    }

    /// Replaces the subtree at `path` by `replacement`, sharing everything off the spine.
    pub fn replace(&self, path: &LeafPath, replacement: &BinaryTree) -> Result<BinaryTree> {
        self.subtree(path)?;
        Ok(self.replace_unchecked(path.steps(), replacement))
    }

    fn replace_unchecked(&self, steps: &[Side], replacement: &BinaryTree) -> BinaryTree {
        match steps.split_first() {
            None => replacement.clone(),
            Some((&side, rest)) => {
                let (l, r) = self.children().expect("validated path");
                match side {
                    Side::L => BinaryTree::node(l.replace_unchecked(rest, replacement), r.clone()),
                    Side::R => BinaryTree::node(l.clone(), r.replace_unchecked(rest, replacement)),
                }
            }
        }
    }

    /// Paths to every leaf, left to right.
    pub fn leaf_paths(&self) -> Vec<LeafPath> {
        let mut out = Vec::with_capacity(self.leaves());
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, path)) = stack.pop() {
            match t.children() {
                None => out.push(LeafPath(path)),
                Some((l, r)) => {
                    let mut rp = path.clone();
                    rp.push(Side::R);
                    let mut lp = path;
                    lp.push(Side::L);
                    stack.push((r, rp));
                    stack.push((l, lp));
                }
            }
        }
        out
    }

    fn tokens(&self) -> impl Iterator<Item = Token> + '_ {
        enum Item<'a> {
            Tree(&'a BinaryTree),
            Close,
        }
        let mut stack = vec![Item::Tree(self)];
        std::iter::from_fn(move || {
            let item = stack.pop()?;
            Some(match item {
                Item::Close => Token::Close,
                Item::Tree(t) => match t.children() {
                    None => Token::Leaf,
                    Some((l, r)) => {
                        stack.push(Item::Close);
                        stack.push(Item::Tree(r));
                        stack.push(Item::Tree(l));
                        Token::Open
                    }
                },
            })
        })
    }

    /// Byte-wise comparison of the text forms, without building the strings.
    /// In ASCII `(` < `)` < `s`.
    pub fn cmp_text(&self, other: &BinaryTree) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.tokens().cmp(other.tokens())
    }

    /// The vector associated with the tree when every leaf holds `s`.
    pub fn eval(&self, sys: &System) -> Vector {
        self.eval_with_leaf(sys, None)
    }

    /// Like [`eval`](Self::eval), but the leaf at `mark` holds `u`.
    pub fn eval_marked(&self, sys: &System, mark: &LeafPath, u: &Vector) -> Result<Vector> {
        self.check_leaf_path(mark)?;
        if u.len() != sys.dim() {
            return Err(Error::Shape(format!("vector of length {} for dimension {}", u.len(), sys.dim())));
        }
        Ok(self.eval_with_leaf(sys, Some((mark.steps(), u))))
    }

    fn eval_with_leaf(&self, sys: &System, marked: Option<(&[Side], &Vector)>) -> Vector {
        match (self.children(), marked) {
            (None, Some((_, u))) => u.clone(),
            (None, None) => sys.start().clone(),
            (Some((l, r)), marked) => {
                let (lm, rm) = match marked {
                    Some((steps, u)) => match steps.split_first() {
                        Some((Side::L, rest)) => (Some((rest, u)), None),
                        Some((Side::R, rest)) => (None, Some((rest, u))),
                        None => unreachable!("path validated to end on a leaf"),
                    },
                    None => (None, None),
                };
                let x = l.eval_with_leaf(sys, lm);
                let y = r.eval_with_leaf(sys, rm);
                sys.combine(&x, &y)
            }
        }
    }
}

impl fmt::Display for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(3 * self.leaves());
        for t in self.tokens() {
            s.push(match t {
                Token::Open => '(',
                Token::Close => ')',
                Token::Leaf => 's',
            });
        }
        f.write_str(&s)
    }
}

impl FromStr for BinaryTree {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let bytes = text.trim().as_bytes();
        let mut stack: Vec<Vec<BinaryTree>> = vec![Vec::new()];
        for (pos, &b) in bytes.iter().enumerate() {
            let err = |msg: &str| Error::parse(format!("tree offset {pos}"), msg.to_string());
            match b {
                b's' => stack.last_mut().expect("non-empty").push(BinaryTree::leaf()),
                b'(' => stack.push(Vec::new()),
                b')' => {
                    let kids = stack.pop().expect("non-empty");
                    if stack.is_empty() {
                        return Err(err("unbalanced ')'"));
                    }
                    let [l, r]: [BinaryTree; 2] =
                        kids.try_into().map_err(|_| err("a node needs exactly two children"))?;
                    stack.last_mut().expect("non-empty").push(BinaryTree::node(l, r));
                }
                _ => return Err(err("expected 's', '(' or ')'")),
            }
        }
        if stack.len() != 1 {
            return Err(Error::parse("end of tree", "unclosed '('"));
        }
        let mut top = stack.pop().expect("non-empty");
        if top.len() != 1 {
            return Err(Error::parse("tree", "expected exactly one tree"));
        }
        Ok(top.pop().expect("one tree"))
    }
}

impl serde::Serialize for BinaryTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BinaryTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn catalan_sizes(max: usize) -> Vec<Vec<BinaryTree>> {
    let mut by_size: Vec<Vec<BinaryTree>> = vec![Vec::new(), vec![BinaryTree::leaf()]];
    for n in 2..=max {
        let mut all = Vec::new();
        for m in 1..n {
            for l in &by_size[m] {
                for r in &by_size[n - m] {
                    all.push(BinaryTree::node(l.clone(), r.clone()));
                }
            }
        }
        by_size.push(all);
    }
    by_size
}

/// Streams every plane binary tree with `n` leaves, grouped by the size of
/// the left subtree.
pub struct TreeEnumerator {
    n: usize,
    smaller: Vec<Vec<BinaryTree>>,
    m: usize,
    a: usize,
    b: usize,
    done: bool,
}

impl Iterator for TreeEnumerator {
    type Item = BinaryTree;

    fn next(&mut self) -> Option<BinaryTree> {
        if self.done {
            return None;
        }
        if self.n == 1 {
            self.done = true;
            return Some(BinaryTree::leaf());
        }
        if self.m >= self.n {
            self.done = true;
            return None;
        }
        let left = &self.smaller[self.m];
        let right = &self.smaller[self.n - self.m];
        let t = BinaryTree::node(left[self.a].clone(), right[self.b].clone());
        self.b += 1;
        if self.b == right.len() {
            self.b = 0;
            self.a += 1;
            if self.a == left.len() {
                self.a = 0;
                self.m += 1;
            }
        }
        Some(t)
    }
}

pub fn enumerate_trees(n: usize) -> Result<TreeEnumerator> {
    if n == 0 {
        return Err(Error::Domain("trees have at least one leaf".into()));
    }
    Ok(TreeEnumerator {
        n,
        smaller: catalan_sizes(n.saturating_sub(1)),
        m: 1,
        a: 0,
        b: 0,
        done: false,
    })
}

/// `T^steps`: `T^1 = T`, and `T^t` is `T` with the marked leaf replaced by `T^(t-1)`.
pub fn iterate_pattern(t: &BinaryTree, mark: &LeafPath, steps: usize) -> Result<BinaryTree> {
    if steps == 0 {
        return Err(Error::Domain("steps must be at least 1".into()));
    }
    t.check_leaf_path(mark)?;
    let mut cur = t.clone();
    for _ in 1..steps {
        cur = t.replace(mark, &cur)?;
    }
    Ok(cur)
}

/// Finds a subtree with `m` leaves, `n/3 <= m <= 2n/3`, by descending into
/// the heavier child (left on ties) until at most `2n/3` leaves remain.
pub fn balanced_subtree(t: &BinaryTree) -> Result<(LeafPath, usize)> {
    let n = t.leaves();
    if n < 2 {
        return Err(Error::Domain("a single leaf has no balanced proper subtree".into()));
    }
    let mut path = Vec::new();
    let mut cur = t;
    while 3 * cur.leaves() > 2 * n {
        let (l, r) = cur.children().expect("more than one leaf");
        if l.leaves() >= r.leaves() {
            path.push(Side::L);
            cur = l;
        } else {
            path.push(Side::R);
            cur = r;
        }
    }
    Ok((LeafPath(path), cur.leaves()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn catalan(n: usize) -> usize {
        // C_0 = 1, C_{k+1} = sum C_i C_{k-i}
        let mut c = vec![1usize];
        for k in 0..n {
            c.push((0..=k).map(|i| c[i] * c[k - i]).sum());
        }
        c[n]
    }

    fn t(s: &str) -> BinaryTree {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in ["s", "(ss)", "((ss)s)", "(s(s(ss)))", "((ss)(ss))"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(BinaryTree::left_comb(3).to_string(), "((ss)s)");
        assert_eq!(BinaryTree::right_comb(3).to_string(), "(s(ss))");
        assert_eq!(BinaryTree::perfect(2).to_string(), "((ss)(ss))");
        for bad in ["", "(s)", "(sss)", "((ss)", "ss", "(ss))", "x"] {
            assert!(bad.parse::<BinaryTree>().is_err(), "{bad}");
        }
    }

    #[test]
    fn text_comparison_matches_strings() {
        let trees: Vec<BinaryTree> = enumerate_trees(5).unwrap().collect();
        for a in &trees {
            for b in &trees {
                assert_eq!(a.cmp_text(b), a.to_string().cmp(&b.to_string()));
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(1).unwrap().count(), 1);
        assert_eq!(enumerate_trees(4).unwrap().count(), 5);
        assert_eq!(enumerate_trees(8).unwrap().count(), 429);
        assert!(matches!(enumerate_trees(0), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration_is_complete_and_duplicate_free() {
        for n in 1..=12 {
            let mut seen = HashSet::new();
            for tree in enumerate_trees(n).unwrap() {
                assert_eq!(tree.leaves(), n);
                assert!(seen.insert(tree), "duplicate at n = {n}");
            }
            assert_eq!(seen.len(), catalan(n - 1), "n = {n}");
        }
    }

    #[test]
    fn paths() {
        let tree = t("(s(ss))");
        let paths: Vec<String> = tree.leaf_paths().iter().map(ToString::to_string).collect();
        assert_eq!(paths, ["L", "RL", "RR"]);
        assert!(tree.check_leaf_path(&"R".parse().unwrap()).is_err());
        assert!(tree.check_leaf_path(&"LL".parse().unwrap()).is_err());
        assert!("LX".parse::<LeafPath>().is_err());
        let replaced = tree.replace(&"RL".parse().unwrap(), &t("(ss)")).unwrap();
        assert_eq!(replaced.to_string(), "(s((ss)s))");
    }

    #[test]
    fn pattern_iteration() {
        let two = t("(ss)");
        let l: LeafPath = "L".parse().unwrap();
        assert_eq!(iterate_pattern(&two, &l, 3).unwrap(), BinaryTree::left_comb(4));
        assert_eq!(iterate_pattern(&two, &l, 1).unwrap(), two);
        let four = t("((ss)(ss))");
        let mark: LeafPath = "RL".parse().unwrap();
        let it = iterate_pattern(&four, &mark, 5).unwrap();
        assert_eq!(it.leaves(), 5 * (4 - 1) + 1);
        assert!(iterate_pattern(&four, &"R".parse().unwrap(), 2).is_err());
        assert!(iterate_pattern(&four, &mark, 0).is_err());
    }

    #[test]
    fn balanced_examples() {
        assert_eq!(balanced_subtree(&BinaryTree::perfect(3)).unwrap().1, 4);
        let (path, m) = balanced_subtree(&BinaryTree::left_comb(9)).unwrap();
        assert_eq!(m, 6);
        assert_eq!(path.to_string(), "LLL");
        assert_eq!(balanced_subtree(&t("(ss)")).unwrap(), ("L".parse().unwrap(), 1));
        assert!(balanced_subtree(&BinaryTree::leaf()).is_err());
    }

    fn random_tree(max: usize) -> impl Strategy<Value = BinaryTree> {
        // Random split sizes give a broad shape distribution.
        (2..=max, any::<u64>()).prop_map(|(n, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            fn build(n: usize, rng: &mut impl Rng) -> BinaryTree {
                if n == 1 {
                    return BinaryTree::leaf();
                }
                let m = rng.gen_range(1..n);
                BinaryTree::node(build(m, rng), build(n - m, rng))
            }
            build(n, &mut rng)
        })
    }

    proptest! {
        #[test]
        fn balanced_subtree_bounds(tree in random_tree(200)) {
            let n = tree.leaves();
            let (path, m) = balanced_subtree(&tree).unwrap();
            prop_assert!(3 * m >= n && 3 * m <= 2 * n, "n = {}, m = {}", n, m);
            prop_assert_eq!(tree.subtree(&path).unwrap().leaves(), m);
        }

        #[test]
        fn text_form_round_trips(tree in random_tree(60)) {
            let s = tree.to_string();
            prop_assert_eq!(s.parse::<BinaryTree>().unwrap(), tree);
        }
    }
}
