//! Stable rooted ribbon trees, bracketings of `(1..r)` and the face poset `K_r`.
//!
//! A tree with `r` leaves and a bracketing of `r` are two views of the same
//! face: the non-singleton brackets are the leaf sets of internal nodes.
//! Singleton brackets are implicit; the full bracket is stored once `r >= 2`.

use crate::poset::{PosetError, RankedPoset};
use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssocError {
    #[error("r must be at least 1, got {0}")]
    BadArity(i64),
    #[error("tree text, position {position}: {reason}")]
    Parse { position: usize, reason: String },
    #[error("concatenation needs at least one tree")]
    EmptyConcat,
    #[error("a bare leaf has no root decomposition")]
    BareLeaf,
    #[error("internal node with {0} children; stable trees need at least 2")]
    Unstable(usize),
    #[error("bracket [{lo},{hi}] is not a non-singleton interval of 1..{r}")]
    BracketRange { lo: usize, hi: usize, r: usize },
    #[error("brackets [{0},{1}] and [{2},{3}] overlap without nesting")]
    Crossing(usize, usize, usize, usize),
    #[error("the full bracket [1,{0}] is missing")]
    MissingFull(usize),
    #[error("malformed bracketing document: {0}")]
    Format(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// Stable rooted ribbon tree. Leaves are numbered left to right from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf,
    Node(Vec<Tree>),
}

impl Tree {
    /// The one-internal-node tree on `r` leaves; the bare leaf when `r = 1`.
    pub fn corolla(r: usize) -> Tree {
        assert!(r >= 1, "corolla needs at least one leaf");
        if r == 1 {
            Tree::Leaf
        } else {
            Tree::Node(vec![Tree::Leaf; r])
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(children) => children.iter().map(Tree::leaf_count).sum(),
        }
    }

    pub fn internal_count(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(children) => 1 + children.iter().map(Tree::internal_count).sum::<usize>(),
        }
    }

    /// `leaves - internal nodes - 1`.
    pub fn dim(&self) -> i64 {
        self.leaf_count() as i64 - self.internal_count() as i64 - 1
    }

    pub fn is_stable(&self) -> bool {
        match self {
            Tree::Leaf => true,
            Tree::Node(children) => children.len() >= 2 && children.iter().all(Tree::is_stable),
        }
    }

    /// Grafts `parts[i]` onto leaf `i` of the corolla with `parts.len()`
    /// leaves. A single part is returned unchanged.
    pub fn concat(parts: Vec<Tree>) -> Result<Tree, AssocError> {
        match parts.len() {
            0 => Err(AssocError::EmptyConcat),
            1 => Ok(parts.into_iter().next().unwrap()),
            _ => Ok(Tree::Node(parts)),
        }
    }

    /// Branches above the root, so that `concat(root_decompose(t)) == t`.
    pub fn root_decompose(&self) -> Result<&[Tree], AssocError> {
        match self {
            Tree::Leaf => Err(AssocError::BareLeaf),
            Tree::Node(children) => Ok(children),
        }
    }

    /// The bracketing whose brackets are the leaf sets of internal nodes.
    pub fn to_bracketing(&self) -> Bracketing {
        fn walk(t: &Tree, start: usize, out: &mut BTreeSet<Bracket>) -> usize {
            match t {
                Tree::Leaf => start + 1,
                Tree::Node(children) => {
                    let mut next = start;
                    for c in children {
                        next = walk(c, next, out);
                    }
                    out.insert(Bracket::new(start, next - 1));
                    next
                }
            }
        }
        let mut brackets = BTreeSet::new();
        let end = walk(self, 1, &mut brackets);
        Bracketing {
            r: end - 1,
            brackets,
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => f.write_str("."),
            Tree::Node(children) => {
                f.write_str("(")?;
                for c in children {
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Tree {
    type Err = AssocError;

    /// Grammar: `TREE := "." | "(" TREE TREE+ ")"`. Whitespace is ignored.
    fn from_str(text: &str) -> Result<Tree, AssocError> {
        let chars: Vec<(usize, char)> = text
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        let mut pos = 0;
        let tree = parse_tree(&chars, &mut pos)?;
        if let Some(&(at, c)) = chars.get(pos) {
            return Err(AssocError::Parse {
                position: at,
                reason: format!("unexpected '{c}' after a complete tree"),
            });
        }
        Ok(tree)
    }
}

fn parse_tree(chars: &[(usize, char)], pos: &mut usize) -> Result<Tree, AssocError> {
    let end = chars.last().map_or(0, |&(i, _)| i + 1);
    match chars.get(*pos) {
        None => Err(AssocError::Parse {
            position: end,
            reason: "unexpected end of input".into(),
        }),
        Some(&(_, '.')) => {
            *pos += 1;
            Ok(Tree::Leaf)
        }
        Some(&(open, '(')) => {
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match chars.get(*pos) {
                    Some(&(_, ')')) => {
                        *pos += 1;
                        break;
                    }
                    None => {
                        return Err(AssocError::Parse {
                            position: end,
                            reason: format!("unclosed '(' at {open}"),
                        })
                    }
                    _ => children.push(parse_tree(chars, pos)?),
                }
            }
            if children.len() < 2 {
                return Err(AssocError::Parse {
                    position: open,
                    reason: format!("node has {} children, needs at least 2", children.len()),
                });
            }
            Ok(Tree::Node(children))
        }
        Some(&(at, c)) => Err(AssocError::Parse {
            position: at,
            reason: format!("unexpected '{c}'"),
        }),
    }
}

/// Integer interval `[lo..hi]`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: usize,
    pub hi: usize,
}

impl Bracket {
    pub fn new(lo: usize, hi: usize) -> Bracket {
        Bracket { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, other: &Bracket) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn disjoint(&self, other: &Bracket) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Nested family of non-singleton brackets of `(1..r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracketing {
    r: usize,
    brackets: BTreeSet<Bracket>,
}

#[derive(Serialize, Deserialize)]
struct BracketingDoc {
    r: usize,
    brackets: Vec<[usize; 2]>,
}

impl Bracketing {
    /// Validates and stores `brackets`; singleton brackets in the input are
    /// accepted and dropped.
    pub fn new(r: usize, brackets: impl IntoIterator<Item = Bracket>) -> Result<Self, AssocError> {
        if r == 0 {
            return Err(AssocError::BadArity(0));
        }
        let mut set = BTreeSet::new();
        for b in brackets {
            if b.lo < 1 || b.hi > r || b.lo > b.hi {
                return Err(AssocError::BracketRange {
                    lo: b.lo,
                    hi: b.hi,
                    r,
                });
            }
            if !b.is_singleton() {
                set.insert(b);
            }
        }
        let list: Vec<&Bracket> = set.iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                if !(a.contains(b) || b.contains(a) || a.disjoint(b)) {
                    return Err(AssocError::Crossing(a.lo, a.hi, b.lo, b.hi));
                }
            }
        }
        if r >= 2 && !set.contains(&Bracket::new(1, r)) {
            return Err(AssocError::MissingFull(r));
        }
        Ok(Bracketing { r, brackets: set })
    }

    /// Only the forced brackets: the maximum of `K_r`.
    pub fn top(r: usize) -> Bracketing {
        Tree::corolla(r).to_bracketing()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn full(&self) -> Bracket {
        Bracket::new(1, self.r)
    }

    /// Stored (non-singleton) brackets in `(lo, hi)` order.
    pub fn brackets(&self) -> &BTreeSet<Bracket> {
        &self.brackets
    }

    /// Membership, counting the implicit singletons.
    pub fn contains(&self, b: &Bracket) -> bool {
        if b.is_singleton() {
            b.lo >= 1 && b.hi <= self.r
        } else {
            self.brackets.contains(b)
        }
    }

    pub fn dim(&self) -> i64 {
        self.r as i64 - 1 - self.brackets.len() as i64
    }

    /// `self <= other` in `K_r`: every bracket of `other` is one of ours.
    pub fn le(&self, other: &Bracketing) -> bool {
        self.r == other.r && other.brackets.is_subset(&self.brackets)
    }

    /// Brackets that are neither singletons nor the full bracket.
    pub fn removable(&self) -> Vec<Bracket> {
        let full = self.full();
        self.brackets.iter().copied().filter(|b| *b != full).collect()
    }

    pub fn without(&self, b: &Bracket) -> Bracketing {
        let mut out = self.clone();
        out.brackets.remove(b);
        out
    }

    /// Maximal proper sub-brackets of `b` (singletons included), left to
    /// right. They partition `b`.
    pub fn children_of(&self, b: &Bracket) -> Vec<Bracket> {
        let mut out = Vec::new();
        let mut i = b.lo;
        while i <= b.hi {
            let widest = self
                .brackets
                .iter()
                .filter(|c| c.lo == i && c.hi <= b.hi && *c != b)
                .max_by_key(|c| c.hi)
                .copied()
                .unwrap_or(Bracket::new(i, i));
            out.push(widest);
            i = widest.hi + 1;
        }
        out
    }

    /// The smallest stored bracket (or singleton) strictly containing `b`.
    pub fn parent_of(&self, b: &Bracket) -> Option<Bracket> {
        self.brackets
            .iter()
            .filter(|c| c.contains(b) && *c != b)
            .min_by_key(|c| c.len())
            .copied()
    }

    /// Dimension of the subtree whose leaves are `b`:
    /// `|b| - 1 - #(stored brackets inside b)`.
    pub fn subtree_dim(&self, b: &Bracket) -> i64 {
        let inside = self.brackets.iter().filter(|c| b.contains(c)).count();
        b.len() as i64 - 1 - inside as i64
    }

    pub fn to_tree(&self) -> Tree {
        self.subtree(&self.full())
    }

    fn subtree(&self, b: &Bracket) -> Tree {
        if b.is_singleton() {
            Tree::Leaf
        } else {
            Tree::Node(self.children_of(b).iter().map(|c| self.subtree(c)).collect())
        }
    }

    /// JSON form with the singletons written out.
    pub fn to_json(&self) -> String {
        let mut all: Vec<Bracket> = (1..=self.r).map(|i| Bracket::new(i, i)).collect();
        all.extend(self.brackets.iter().copied());
        all.sort();
        let doc = BracketingDoc {
            r: self.r,
            brackets: all.iter().map(|b| [b.lo, b.hi]).collect(),
        };
        serde_json::to_string(&doc).expect("bracketing documents always serialise")
    }

    pub fn from_json(text: &str) -> Result<Bracketing, AssocError> {
        let doc: BracketingDoc =
            serde_json::from_str(text).map_err(|e| AssocError::Format(e.to_string()))?;
        Bracketing::new(doc.r, doc.brackets.iter().map(|&[lo, hi]| Bracket::new(lo, hi)))
    }
}

impl fmt::Display for Bracketing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tree())
    }
}

/// Every stable tree with `r` leaves, in no particular order.
pub fn enumerate_trees(r: usize) -> Result<Vec<Tree>, AssocError> {
    if r == 0 {
        return Err(AssocError::BadArity(0));
    }
    // by_size[q] = all trees with q leaves
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(), vec![Tree::Leaf]];
    for q in 2..=r {
        let mut trees = Vec::new();
        // sequences of >= 2 subtrees whose leaf counts sum to q
        let mut stack: Vec<(usize, Vec<Tree>)> = vec![(q, Vec::new())];
        while let Some((left, prefix)) = stack.pop() {
            if left == 0 {
                if prefix.len() >= 2 {
                    trees.push(Tree::Node(prefix));
                }
                continue;
            }
            let cap = if prefix.is_empty() { left - 1 } else { left };
            for size in 1..=cap {
                for t in &by_size[size] {
                    let mut next = prefix.clone();
                    next.push(t.clone());
                    stack.push((left - size, next));
                }
            }
        }
        by_size.push(trees);
    }
    Ok(by_size.swap_remove(r))
}

/// `K_r` as a ranked poset, elements sorted by tree text.
#[derive(Debug, Clone)]
pub struct KPoset {
    pub poset: RankedPoset,
    pub elements: Vec<Bracketing>,
}

impl KPoset {
    pub fn index_of(&self, b: &Bracketing) -> Option<usize> {
        let label = b.to_string();
        self.poset
            .labels()
            .binary_search_by(|l| l.as_str().cmp(&label))
            .ok()
    }

    pub fn top(&self) -> usize {
        self.index_of(&Bracketing::top(self.elements[0].r()))
            .expect("the corolla is always enumerated")
    }
}

/// Faces of the associahedron on `r` leaves. `X <= Y` iff `X` has every
/// bracket of `Y`; removing one removable bracket is a cover.
pub fn enumerate_kr(r: usize) -> Result<KPoset, AssocError> {
    let mut elements: Vec<(String, Bracketing)> = enumerate_trees(r)?
        .into_iter()
        .map(|t| (t.to_string(), t.to_bracketing()))
        .collect();
    elements.sort_by(|a, b| a.0.cmp(&b.0));
    let index: HashMap<&Bracketing, usize> =
        elements.iter().enumerate().map(|(i, (_, b))| (b, i)).collect();
    let mut covers = Vec::new();
    for (i, (_, b)) in elements.iter().enumerate() {
        for rem in b.removable() {
            covers.push((i, index[&b.without(&rem)]));
        }
    }
    let ranks = elements.iter().map(|(_, b)| b.dim()).collect();
    let (labels, elements): (Vec<String>, Vec<Bracketing>) = elements.into_iter().unzip();
    let poset = RankedPoset::from_covers(ranks, labels, covers)?;
    Ok(KPoset { poset, elements })
}

/// Memoised face counts `a_{m,r}` of `K_r` by dimension.
///
/// `a_{m,r} = sum_{k=2}^{min(r, m+2)} sum a_{p_1 q_1} .. a_{p_k q_k}` over
/// `p_1 + .. + p_k = m - k + 2` and `q_1 + .. + q_k = r`, with
/// `a_{0,1} = 1` and `a_{m,1} = 0` otherwise.
#[derive(Debug, Default)]
pub struct KCounter {
    counts: DashMap<(usize, usize), BigInt>,
    // products of k factors: (k, P, Q) -> sum over compositions
    products: DashMap<(usize, usize, usize), BigInt>,
}

impl KCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count_k(&self, m: usize, r: usize) -> BigInt {
        if let Some(v) = self.counts.get(&(m, r)) {
            return v.clone();
        }
        let value = match r {
            0 => BigInt::zero(),
            1 => {
                if m == 0 {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }
            _ => {
                let mut total = BigInt::zero();
                for k in 2..=r.min(m + 2) {
                    total += self.product(k, m + 2 - k, r);
                }
                total
            }
        };
        self.counts.insert((m, r), value.clone());
        value
    }

    fn product(&self, k: usize, p: usize, q: usize) -> BigInt {
        if k == 1 {
            return self.count_k(p, q);
        }
        if q < k {
            return BigInt::zero();
        }
        if let Some(v) = self.products.get(&(k, p, q)) {
            return v.clone();
        }
        let mut total = BigInt::zero();
        for p1 in 0..=p {
            for q1 in 1..=q - (k - 1) {
                let head = self.count_k(p1, q1);
                if head.is_zero() {
                    continue;
                }
                total += head * self.product(k - 1, p - p1, q - q1);
            }
        }
        self.products.insert((k, p, q), total.clone());
        total
    }

    /// Pre-loads a value, e.g. from an on-disk cache.
    pub fn seed(&self, m: usize, r: usize, value: BigInt) {
        self.counts.insert((m, r), value);
    }

    /// Memoised `(m, r, a_{m,r})` triples, sorted.
    pub fn entries(&self) -> Vec<(usize, usize, BigInt)> {
        let mut out: Vec<_> = self
            .counts
            .iter()
            .map(|e| (e.key().0, e.key().1, e.value().clone()))
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_counts(r: usize) -> Vec<usize> {
        enumerate_kr(r)
            .unwrap()
            .poset
            .rank_counts()
            .values()
            .copied()
            .collect()
    }

    #[test]
    fn small_rank_counts() {
        assert_eq!(rank_counts(1), vec![1]);
        assert_eq!(rank_counts(2), vec![1]);
        assert_eq!(rank_counts(3), vec![2, 1]);
        assert_eq!(rank_counts(4), vec![5, 5, 1]);
        assert_eq!(rank_counts(5), vec![14, 21, 9, 1]);
    }

    #[test]
    fn r_zero_rejected() {
        assert_eq!(enumerate_kr(0).unwrap_err(), AssocError::BadArity(0));
    }

    #[test]
    fn dims() {
        assert_eq!(Tree::Leaf.dim(), 0);
        for r in 2..8 {
            assert_eq!(Tree::corolla(r).dim(), r as i64 - 2);
        }
        let comb: Tree = "((..).)".parse().unwrap();
        assert_eq!(comb.dim(), 0);
    }

    #[test]
    fn concat_cases() {
        assert_eq!(Tree::concat(vec![Tree::Leaf]).unwrap(), Tree::Leaf);
        let two = Tree::concat(vec![Tree::Leaf, Tree::Leaf]).unwrap();
        assert_eq!(two, Tree::corolla(2));
        assert_eq!(two.dim(), 0);
        let t = Tree::concat(vec![Tree::corolla(3), Tree::Leaf]).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(Tree::concat(vec![]).unwrap_err(), AssocError::EmptyConcat);
    }

    #[test]
    fn concat_dimension_formula() {
        for r in 2..=5 {
            for t in enumerate_trees(r).unwrap() {
                let parts = t.root_decompose().unwrap();
                let k = parts.len() as i64;
                let sum: i64 = parts.iter().map(Tree::dim).sum();
                assert_eq!(t.dim(), sum + k - 2, "{t}");
            }
        }
    }

    #[test]
    fn root_decompose_round_trip() {
        assert_eq!(Tree::Leaf.root_decompose().unwrap_err(), AssocError::BareLeaf);
        assert_eq!(Tree::corolla(2).root_decompose().unwrap(), &[Tree::Leaf, Tree::Leaf]);
        for r in 2..=6 {
            for t in enumerate_trees(r).unwrap() {
                let parts = t.root_decompose().unwrap().to_vec();
                assert!(parts.len() >= 2);
                assert_eq!(Tree::concat(parts).unwrap(), t);
            }
        }
    }

    #[test]
    fn parse_and_print() {
        for text in [".", "(..)", "((..).)", "(.(...).)"] {
            let t: Tree = text.parse().unwrap();
            assert_eq!(t.to_string(), text);
            assert!(t.is_stable());
        }
        assert_eq!(" ( . . ) ".parse::<Tree>().unwrap(), Tree::corolla(2));
        for bad in ["", "(.)", "(..", "..", "(.x)", "()"] {
            assert!(
                matches!(bad.parse::<Tree>(), Err(AssocError::Parse { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn tree_bracketing_bijection() {
        for r in 1..=6 {
            let trees = enumerate_trees(r).unwrap();
            let set: BTreeSet<Bracketing> = trees.iter().map(Tree::to_bracketing).collect();
            assert_eq!(set.len(), trees.len());
            for t in &trees {
                let b = t.to_bracketing();
                assert_eq!(b.r(), r);
                assert_eq!(b.dim(), t.dim());
                assert_eq!(&b.to_tree(), t);
            }
        }
    }

    #[test]
    fn bracketing_validation() {
        let b = |lo, hi| Bracket::new(lo, hi);
        assert!(Bracketing::new(4, [b(1, 4), b(1, 2)]).is_ok());
        assert_eq!(
            Bracketing::new(4, [b(1, 4), b(1, 2), b(2, 3)]).unwrap_err(),
            AssocError::Crossing(1, 2, 2, 3)
        );
        assert_eq!(
            Bracketing::new(4, [b(1, 2)]).unwrap_err(),
            AssocError::MissingFull(4)
        );
        assert!(matches!(
            Bracketing::new(4, [b(1, 5)]),
            Err(AssocError::BracketRange { .. })
        ));
        assert!(Bracketing::new(1, []).is_ok());
    }

    #[test]
    fn removable_brackets() {
        let x = Bracketing::new(4, [Bracket::new(1, 4), Bracket::new(1, 2)]).unwrap();
        assert_eq!(x.removable(), vec![Bracket::new(1, 2)]);
        assert!(Bracketing::top(4).removable().is_empty());
        assert_eq!(
            x.children_of(&Bracket::new(1, 4)),
            vec![Bracket::new(1, 2), Bracket::new(3, 3), Bracket::new(4, 4)]
        );
        assert_eq!(x.subtree_dim(&Bracket::new(1, 2)), 0);
        assert_eq!(x.subtree_dim(&Bracket::new(1, 4)), 1);
    }

    #[test]
    fn json_round_trip() {
        let x = Bracketing::new(4, [Bracket::new(1, 4), Bracket::new(2, 3)]).unwrap();
        let text = x.to_json();
        assert_eq!(
            text,
            r#"{"r":4,"brackets":[[1,1],[1,4],[2,2],[2,3],[3,3],[4,4]]}"#
        );
        assert_eq!(Bracketing::from_json(&text).unwrap(), x);
    }

    #[test]
    fn top_is_unique_maximum() {
        for r in 1..=6 {
            let k = enumerate_kr(r).unwrap();
            let top = k.top();
            assert_eq!(k.poset.maximal_elements(), vec![top]);
            assert_eq!(k.poset.rank(top), (r as i64 - 2).max(0));
            assert!(k.poset.labels().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn completed_kr_is_eulerian() {
        for r in 1..=6 {
            let k = enumerate_kr(r).unwrap().poset.complete_with_min(-1).unwrap();
            let report = k.verify_eulerian();
            assert!(report.is_eulerian(), "r = {r}: {:?}", report.unbalanced);
        }
    }

    #[test]
    fn euler_sum_is_one() {
        for r in 1..=8 {
            let k = enumerate_kr(r).unwrap();
            let sum: i64 = k
                .poset
                .ranks()
                .iter()
                .map(|&d| crate::poset::sign_of_rank(d))
                .sum();
            assert_eq!(sum, 1, "r = {r}");
        }
    }

    #[test]
    fn recurrence_matches_enumeration() {
        let counter = KCounter::new();
        assert_eq!(counter.count_k(0, 1), BigInt::from(1));
        assert_eq!(counter.count_k(3, 1), BigInt::from(0));
        assert_eq!(counter.count_k(2, 4), BigInt::from(1));
        for r in 1..=8 {
            let k = enumerate_kr(r).unwrap();
            let counts = k.poset.rank_counts();
            for m in 0..r + 1 {
                let enumerated = counts.get(&(m as i64)).copied().unwrap_or(0);
                assert_eq!(counter.count_k(m, r), BigInt::from(enumerated), "m={m} r={r}");
            }
        }
    }

    #[test]
    fn seeded_values_are_returned() {
        let counter = KCounter::new();
        counter.seed(0, 5, BigInt::from(14));
        assert_eq!(counter.count_k(0, 5), BigInt::from(14));
        assert_eq!(counter.entries(), vec![(0, 5, BigInt::from(14))]);
    }
}
