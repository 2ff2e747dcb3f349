//! Finite ranked posets.
//!
//! A [`RankedPoset`] stores its Hasse diagram together with an integer rank
//! per element. Covers must raise rank by exactly one, which makes every
//! stored poset graded. Up- and down-sets are materialised as bitsets the
//! first time an order query needs them, so interval queries are cheap set
//! intersections while cover-only consumers never pay for the closure.

mod cd;
mod io;
mod products;

pub use cd::{AbPolynomial, AbWord, CdLetter, CdPolynomial, FlagVector};
pub use io::{ElementDoc, PosetDocument};
pub use products::{fiber_product, reduced_product, reduced_product_all, FiberFactor};

use dashmap::DashMap;
use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

/// Dense element identifier inside one [`RankedPoset`].
pub type ElemId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("element {0} out of range (poset has {1} elements)")]
    UnknownElement(ElemId, usize),
    #[error("[{0}, {1}] is not an interval: the lower end is not below the upper end")]
    NotComparable(ElemId, ElemId),
    #[error("{ranks} ranks but {labels} labels")]
    ShapeMismatch { ranks: usize, labels: usize },
    #[error("cover {lower} -> {upper} goes from rank {lower_rank} to rank {upper_rank}")]
    CoverRank {
        lower: ElemId,
        upper: ElemId,
        lower_rank: i64,
        upper_rank: i64,
    },
    #[error("completion rank {min_rank} is not exactly one below minimal element {element} (rank {rank})")]
    CompletionRank {
        min_rank: i64,
        element: ElemId,
        rank: i64,
    },
    #[error("{0}: needs a unique minimum and a unique maximum")]
    NotBounded(String),
    #[error("factor {factor}: {reason}")]
    BadFactor { factor: usize, reason: String },
    #[error("ab-index has no cd-expansion: {0}")]
    NotEulerian(String),
    #[error("poset is not graded")]
    NotGraded,
    #[error("rank span {0} too large for flag vectors")]
    RankSpanTooLarge(i64),
    #[error("malformed poset document: {0}")]
    Format(String),
}

/// Parity sign `(-1)^rank`, valid for negative ranks too.
pub fn sign_of_rank(rank: i64) -> i64 {
    if rank.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
struct Closure {
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
}

#[derive(Clone, Debug)]
pub struct RankedPoset {
    ranks: Vec<i64>,
    labels: Vec<String>,
    covers: Vec<(ElemId, ElemId)>,
    upper_covers: Vec<Vec<ElemId>>,
    lower_covers: Vec<Vec<ElemId>>,
    closure: OnceLock<Closure>,
    even: FixedBitSet,
    mobius_rows: DashMap<ElemId, Arc<Vec<i64>>>,
}

impl PartialEq for RankedPoset {
    fn eq(&self, other: &Self) -> bool {
        self.ranks == other.ranks && self.labels == other.labels && self.covers == other.covers
    }
}

impl Eq for RankedPoset {}

impl RankedPoset {
    /// Builds a poset from its Hasse diagram.
    ///
    /// Every cover `(lower, upper)` must satisfy `rank(upper) = rank(lower) + 1`;
    /// duplicate covers are merged.
    pub fn from_covers(
        ranks: Vec<i64>,
        labels: Vec<String>,
        covers: impl IntoIterator<Item = (ElemId, ElemId)>,
    ) -> Result<Self, PosetError> {
        let n = ranks.len();
        if labels.len() != n {
            return Err(PosetError::ShapeMismatch {
                ranks: n,
                labels: labels.len(),
            });
        }
        let mut covers: Vec<(ElemId, ElemId)> = covers.into_iter().collect();
        covers.sort_unstable();
        covers.dedup();
        let mut upper_covers = vec![Vec::new(); n];
        let mut lower_covers = vec![Vec::new(); n];
        for &(lo, hi) in &covers {
            for e in [lo, hi] {
                if e >= n {
                    return Err(PosetError::UnknownElement(e, n));
                }
            }
            if ranks[hi] != ranks[lo] + 1 {
                return Err(PosetError::CoverRank {
                    lower: lo,
                    upper: hi,
                    lower_rank: ranks[lo],
                    upper_rank: ranks[hi],
                });
            }
            upper_covers[lo].push(hi);
            lower_covers[hi].push(lo);
        }

        let mut even = FixedBitSet::with_capacity(n);
        for (e, &r) in ranks.iter().enumerate() {
            if sign_of_rank(r) == 1 {
                even.insert(e);
            }
        }

        Ok(Self {
            ranks,
            labels,
            covers,
            upper_covers,
            lower_covers,
            closure: OnceLock::new(),
            even,
            mobius_rows: DashMap::new(),
        })
    }

    /// Up- and down-sets, built on first use.
    fn closure(&self) -> &Closure {
        self.closure.get_or_init(|| {
            let n = self.len();
            // covers raise rank, so sweeping by rank gives a linear extension
            let mut by_rank: Vec<ElemId> = (0..n).collect();
            by_rank.sort_by_key(|&e| (self.ranks[e], e));
            let mut up = vec![FixedBitSet::new(); n];
            for &x in by_rank.iter().rev() {
                let mut set = FixedBitSet::with_capacity(n);
                set.insert(x);
                for &c in &self.upper_covers[x] {
                    set.union_with(&up[c]);
                }
                up[x] = set;
            }
            let mut down = vec![FixedBitSet::new(); n];
            for &y in &by_rank {
                let mut set = FixedBitSet::with_capacity(n);
                set.insert(y);
                for &c in &self.lower_covers[y] {
                    set.union_with(&down[c]);
                }
                down[y] = set;
            }
            Closure { up, down }
        })
    }

    /// Builds a poset from ranks and the full order relation, given as
    /// up-sets (`up[x]` holds every `y` with `x <= y`).
    pub fn from_order(
        ranks: Vec<i64>,
        labels: Vec<String>,
        up: &[FixedBitSet],
    ) -> Result<Self, PosetError> {
        let mut ascending: Vec<ElemId> = (0..ranks.len()).collect();
        ascending.sort_by_key(|&e| (ranks[e], e));
        let covers = covers_from_order(up, &ascending);
        Self::from_covers(ranks, labels, covers)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, x: ElemId) -> i64 {
        self.ranks[x]
    }

    pub fn ranks(&self) -> &[i64] {
        &self.ranks
    }

    pub fn label(&self, x: ElemId) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Hasse diagram as sorted `(lower, upper)` pairs.
    pub fn covers(&self) -> &[(ElemId, ElemId)] {
        &self.covers
    }

    pub fn upper_covers(&self, x: ElemId) -> &[ElemId] {
        &self.upper_covers[x]
    }

    pub fn lower_covers(&self, x: ElemId) -> &[ElemId] {
        &self.lower_covers[x]
    }

    pub fn up_set(&self, x: ElemId) -> &FixedBitSet {
        &self.closure().up[x]
    }

    pub fn down_set(&self, x: ElemId) -> &FixedBitSet {
        &self.closure().down[x]
    }

    pub fn le(&self, x: ElemId, y: ElemId) -> bool {
        self.closure().up[x].contains(y)
    }

    pub fn lt(&self, x: ElemId, y: ElemId) -> bool {
        x != y && self.le(x, y)
    }

    pub fn minimal_elements(&self) -> Vec<ElemId> {
        (0..self.len())
            .filter(|&e| self.lower_covers[e].is_empty())
            .collect()
    }

    pub fn maximal_elements(&self) -> Vec<ElemId> {
        (0..self.len())
            .filter(|&e| self.upper_covers[e].is_empty())
            .collect()
    }

    pub fn unique_min(&self) -> Option<ElemId> {
        match self.minimal_elements().as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }

    pub fn unique_max(&self) -> Option<ElemId> {
        match self.maximal_elements().as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }

    /// Number of elements per rank.
    pub fn rank_counts(&self) -> BTreeMap<i64, usize> {
        let mut counts = BTreeMap::new();
        for &r in &self.ranks {
            *counts.entry(r).or_insert(0) += 1;
        }
        counts
    }

    /// Elements with the given rank, in id order.
    pub fn elements_of_rank(&self, rank: i64) -> Vec<ElemId> {
        (0..self.len()).filter(|&e| self.ranks[e] == rank).collect()
    }

    /// Elements grouped by rank, ascending.
    pub fn rank_levels(&self) -> BTreeMap<i64, Vec<ElemId>> {
        let mut levels: BTreeMap<i64, Vec<ElemId>> = BTreeMap::new();
        for (e, &r) in self.ranks.iter().enumerate() {
            levels.entry(r).or_default().push(e);
        }
        levels
    }

    fn check_interval(&self, x: ElemId, y: ElemId) -> Result<(), PosetError> {
        for e in [x, y] {
            if e >= self.len() {
                return Err(PosetError::UnknownElement(e, self.len()));
            }
        }
        if !self.le(x, y) {
            return Err(PosetError::NotComparable(x, y));
        }
        Ok(())
    }

    /// Elements of the closed interval `[x, y]`.
    pub fn interval(&self, x: ElemId, y: ElemId) -> Result<Vec<ElemId>, PosetError> {
        self.check_interval(x, y)?;
        let mut set = self.closure().up[x].clone();
        set.intersect_with(&self.closure().down[y]);
        Ok(set.ones().collect())
    }

    fn interval_sum_unchecked(&self, x: ElemId, y: ElemId) -> i64 {
        let (mut even, mut total) = (0i64, 0i64);
        for ((u, d), e) in self.closure().up[x]
            .as_slice()
            .iter()
            .zip(self.closure().down[y].as_slice())
            .zip(self.even.as_slice())
        {
            let both = u & d;
            total += both.count_ones() as i64;
            even += (both & e).count_ones() as i64;
        }
        even - (total - even)
    }

    /// Signed count `sum_{z in [x,y]} (-1)^rank(z)`.
    pub fn alternating_sum(&self, x: ElemId, y: ElemId) -> Result<i64, PosetError> {
        self.check_interval(x, y)?;
        Ok(self.interval_sum_unchecked(x, y))
    }

    pub fn is_balanced(&self, x: ElemId, y: ElemId) -> Result<bool, PosetError> {
        Ok(self.alternating_sum(x, y)? == 0)
    }

    /// Alternating sum over every element of the poset.
    pub fn total_alternating_sum(&self) -> i64 {
        self.ranks.iter().map(|&r| sign_of_rank(r)).sum()
    }

    /// Every cover raises rank by one, so each interval has all maximal
    /// chains of length `rank(y) - rank(x)`.
    pub fn is_graded(&self) -> bool {
        self.covers
            .iter()
            .all(|&(lo, hi)| self.ranks[hi] == self.ranks[lo] + 1)
    }

    /// Checks every pair `x < y` for balance.
    pub fn verify_eulerian(&self) -> EulerianReport {
        let per_lower: Vec<(u64, Vec<UnbalancedInterval>)> = (0..self.len())
            .into_par_iter()
            .map(|x| {
                let mut checked = 0u64;
                let mut bad = Vec::new();
                for y in self.closure().up[x].ones() {
                    if y == x {
                        continue;
                    }
                    checked += 1;
                    let sum = self.interval_sum_unchecked(x, y);
                    if sum != 0 {
                        bad.push(UnbalancedInterval {
                            lower: x,
                            upper: y,
                            alternating_sum: sum,
                        });
                    }
                }
                (checked, bad)
            })
            .collect();
        let mut report = EulerianReport {
            graded: self.is_graded(),
            pairs_checked: 0,
            unbalanced: Vec::new(),
        };
        for (checked, bad) in per_lower {
            report.pairs_checked += checked;
            report.unbalanced.extend(bad);
        }
        report
    }

    /// Intervals of length two whose middle does not have exactly two elements.
    pub fn diamond_violations(&self) -> Vec<(ElemId, ElemId, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for y in self.closure().up[x].ones() {
                if self.ranks[y] - self.ranks[x] != 2 {
                    continue;
                }
                let middle = self.closure().up[x].intersection_count(&self.closure().down[y]) - 2;
                if middle != 2 {
                    out.push((x, y, middle));
                }
            }
        }
        out
    }

    /// Row `mu(x, .)` of the Möbius function, zero outside the up-set of `x`.
    pub fn mobius_row(&self, x: ElemId) -> Arc<Vec<i64>> {
        if let Some(row) = self.mobius_rows.get(&x) {
            return Arc::clone(&row);
        }
        let row = Arc::new(self.compute_mobius_row(x));
        // Concurrent callers may race here; both compute the same row.
        self.mobius_rows
            .entry(x)
            .or_insert_with(|| Arc::clone(&row))
            .clone()
    }

    fn compute_mobius_row(&self, x: ElemId) -> Vec<i64> {
        let mut row = vec![0i64; self.len()];
        let mut members: Vec<ElemId> = self.closure().up[x].ones().collect();
        members.sort_by_key(|&e| (self.ranks[e], e));
        for &y in &members {
            if y == x {
                row[y] = 1;
                continue;
            }
            let mut acc = 0i64;
            for ((u, d), block) in self.closure().up[x]
                .as_slice()
                .iter()
                .zip(self.closure().down[y].as_slice())
                .enumerate()
                .map(|(i, pair)| (pair, i))
            {
                let mut bits = u & d;
                while bits != 0 {
                    let z = block * usize::BITS as usize + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if z != y {
                        acc += row[z];
                    }
                }
            }
            row[y] = -acc;
        }
        row
    }

    /// `mu(x, y)` with `mu(x, x) = 1` and `mu(x, y) = -sum_{x <= z < y} mu(x, z)`.
    pub fn mobius(&self, x: ElemId, y: ElemId) -> Result<i64, PosetError> {
        self.check_interval(x, y)?;
        Ok(self.mobius_row(x)[y])
    }

    /// Pairs `x <= y` with `mu(x, y) != (-1)^(rank(y) - rank(x))`.
    ///
    /// Rows are computed on the fly and not retained in the memo table.
    pub fn mobius_sign_violations(&self) -> Vec<(ElemId, ElemId, i64)> {
        (0..self.len())
            .into_par_iter()
            .flat_map_iter(|x| {
                let row = self.compute_mobius_row(x);
                self.closure().up[x]
                    .ones()
                    .filter_map(|y| {
                        let expected = sign_of_rank(self.ranks[y] - self.ranks[x]);
                        (row[y] != expected).then_some((x, y, row[y]))
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Adds a new minimum of rank `min_rank` below every minimal element.
    ///
    /// The new element is appended, so existing ids are unchanged.
    pub fn complete_with_min(&self, min_rank: i64) -> Result<RankedPoset, PosetError> {
        self.complete_with_min_labeled(min_rank, "min")
    }

    pub fn complete_with_min_labeled(
        &self,
        min_rank: i64,
        label: &str,
    ) -> Result<RankedPoset, PosetError> {
        let bottom = self.len();
        let minimal = self.minimal_elements();
        for &m in &minimal {
            if self.ranks[m] != min_rank + 1 {
                return Err(PosetError::CompletionRank {
                    min_rank,
                    element: m,
                    rank: self.ranks[m],
                });
            }
        }
        let mut ranks = self.ranks.clone();
        ranks.push(min_rank);
        let mut labels = self.labels.clone();
        labels.push(label.to_string());
        let covers = self
            .covers
            .iter()
            .copied()
            .chain(minimal.into_iter().map(|m| (bottom, m)));
        RankedPoset::from_covers(ranks, labels, covers)
    }

    /// Subposet on a down- or up-closed or otherwise arbitrary set of
    /// elements, with the induced order. Ranks are kept.
    pub fn induced(&self, keep: &[ElemId]) -> Result<RankedPoset, PosetError> {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &e) in keep.iter().enumerate() {
            if e >= self.len() {
                return Err(PosetError::UnknownElement(e, self.len()));
            }
            index[e] = i;
        }
        let mut up = Vec::with_capacity(keep.len());
        for &e in keep {
            let mut set = FixedBitSet::with_capacity(keep.len());
            for z in self.closure().up[e].ones() {
                if index[z] != usize::MAX {
                    set.insert(index[z]);
                }
            }
            up.push(set);
        }
        RankedPoset::from_order(
            keep.iter().map(|&e| self.ranks[e]).collect(),
            keep.iter().map(|&e| self.labels[e].clone()).collect(),
            &up,
        )
    }

    pub fn flag_f_vector(&self) -> Result<FlagVector, PosetError> {
        cd::flag_f_vector(self)
    }

    /// cd-index of a bounded, graded, Eulerian poset.
    pub fn cd_index(&self) -> Result<CdPolynomial, PosetError> {
        cd::cd_index(self)
    }

    pub fn to_json(&self) -> String {
        io::to_json(self)
    }

    pub fn from_json(text: &str) -> Result<RankedPoset, PosetError> {
        io::from_json(text)
    }

    pub fn to_dot(&self) -> String {
        io::to_dot(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnbalancedInterval {
    pub lower: ElemId,
    pub upper: ElemId,
    pub alternating_sum: i64,
}

/// Outcome of [`RankedPoset::verify_eulerian`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerianReport {
    pub graded: bool,
    pub pairs_checked: u64,
    pub unbalanced: Vec<UnbalancedInterval>,
}

impl EulerianReport {
    pub fn is_eulerian(&self) -> bool {
        self.graded && self.unbalanced.is_empty()
    }
}

/// Hasse diagram of an order relation.
///
/// `up[x]` must contain every `y >= x` (including `x`), and `ascending`
/// must list all elements in a linear extension of the order.
pub fn covers_from_order(up: &[FixedBitSet], ascending: &[ElemId]) -> Vec<(ElemId, ElemId)> {
    let n = up.len();
    let mut position = vec![0usize; n];
    for (i, &e) in ascending.iter().enumerate() {
        position[e] = i;
    }
    let mut covers = Vec::new();
    for x in 0..n {
        let mut above: Vec<ElemId> = up[x].ones().filter(|&y| y != x).collect();
        above.sort_unstable_by_key(|&y| position[y]);
        let mut reached = FixedBitSet::with_capacity(n);
        for y in above {
            if !reached.contains(y) {
                covers.push((x, y));
                reached.union_with(&up[y]);
            }
        }
    }
    covers.sort_unstable();
    covers
}

/// Length of the longest chain from a minimal element to each element.
pub fn heights(n: usize, covers: &[(ElemId, ElemId)], ascending: &[ElemId]) -> Vec<i64> {
    let mut lower = vec![Vec::new(); n];
    for &(lo, hi) in covers {
        lower[hi].push(lo);
    }
    let mut height = vec![0i64; n];
    for &y in ascending {
        height[y] = lower[y].iter().map(|&x| height[x] + 1).max().unwrap_or(0);
    }
    height
}
