//! 2-bracketings and the face poset `W_n` of the 2-associahedron.
//!
//! Picture `r` vertical lines, line `i` carrying `n_i` marked points. A
//! 2-bracket is a bubble over a bracket `B` of lines which, on every line of
//! `B`, encloses a run of consecutive points or, if it encloses none there,
//! crosses the line at a gap between two points.
//!
//! Extents are compared through cuts: cut `c` on a line sits just above
//! point `c` (cut 0 is below the first point). A run of points `a..=b`
//! spans cuts `(a - 1, b)` and a gap at `g` is the degenerate span `(g, g)`.
//! One bubble lies inside another when its span is inside the other's span
//! on every line it crosses, and below another when its top cut is at most
//! the other's bottom cut.
//!
//! A family `(brackets, 2-brackets)` is a face when
//!
//! * the brackets form a bracketing of `1..r`;
//! * every 2-bracket lies over a member bracket, and every non-singleton
//!   bracket carrying points has a 2-bracket over it;
//! * all point singletons and the maximal bubble are present, and every
//!   bubble encloses a point;
//! * any two bubbles are nested or disjoint, disjoint ones being stacked in
//!   the same order on every shared line;
//! * the children of a bubble lie either over its own bracket or over the
//!   maximal sub-brackets of that bracket;
//! * a bubble never mixes both kinds of children, and a bubble whose
//!   children lie over its own bracket has at least two of them.
//!
//! Faces are ordered by reverse inclusion: more bubbles and brackets means
//! more degenerate, hence lower.

use crate::associahedron::{enumerate_kr, AssocError, Bracket, Bracketing, KCounter, KPoset, Tree};
use crate::poset::{heights, PosetError, RankedPoset};
use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwoAssocError {
    #[error("invalid point vector: {0}")]
    BadN(String),
    #[error("malformed 2-bracketing: {0}")]
    Malformed(String),
    #[error("{condition} violated: {detail}")]
    Violation { condition: Condition, detail: String },
    #[error("tree has {leaves} leaves but n has {entries} entries")]
    Shape { leaves: usize, entries: usize },
    #[error("bracket {0} is not in the bracketing")]
    NotMember(Bracket),
    #[error("search exceeded {0} faces")]
    TooLarge(usize),
    #[error("enumeration is not graded: {0}")]
    NotGraded(String),
    #[error("{0}")]
    DimMismatch(String),
    #[error(transparent)]
    Assoc(#[from] AssocError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// The defining conditions of a 2-bracketing, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Bracketing,
    Projection,
    Forced,
    Nesting,
    Refinement,
    Unfused,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Bracketing => "bracketing",
            Condition::Projection => "projection",
            Condition::Forced => "forced members",
            Condition::Nesting => "nesting",
            Condition::Refinement => "refinement",
            Condition::Unfused => "unfused seams",
        })
    }
}

fn violation(condition: Condition, detail: impl Into<String>) -> TwoAssocError {
    TwoAssocError::Violation {
        condition,
        detail: detail.into(),
    }
}

/// Points per line; at least one line, not all zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NVector(Vec<u32>);

impl NVector {
    pub fn new(entries: Vec<u32>) -> Result<Self, TwoAssocError> {
        if entries.is_empty() {
            return Err(TwoAssocError::BadN("needs at least one line".into()));
        }
        if entries.iter().all(|&v| v == 0) {
            return Err(TwoAssocError::BadN(
                "n must be nonzero (n != 0): some line needs a marked point".into(),
            ));
        }
        Ok(NVector(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// `|n|`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Points on line `i` (1-based).
    pub fn at(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    /// `n(B)`, or `None` when `B` carries no points.
    pub fn restrict(&self, b: &Bracket) -> Option<NVector> {
        NVector::new(self.0[b.lo - 1..b.hi].to_vec()).ok()
    }

    pub fn has_points(&self, b: &Bracket) -> bool {
        self.0[b.lo - 1..b.hi].iter().any(|&v| v > 0)
    }

    /// Dimension of the top face, `|n| + r - 3`, floored at 0 for `n = (1)`.
    pub fn top_dim(&self) -> i64 {
        (self.total() as i64 + self.r() as i64 - 3).max(0)
    }
}

impl fmt::Display for NVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for NVector {
    type Err = TwoAssocError;

    /// Comma-separated nonnegative integers, e.g. `1,2`.
    fn from_str(text: &str) -> Result<Self, TwoAssocError> {
        let entries = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| TwoAssocError::BadN(format!("'{}' is not a count", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        NVector::new(entries)
    }
}

/// What a bubble encloses on one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extent {
    /// Points `lo..=hi`, 1-based.
    Points { lo: u32, hi: u32 },
    /// No points; crosses the line just above point `g` (0 = below all).
    Gap(u32),
}

impl Extent {
    /// Span in cut coordinates.
    pub fn cuts(&self) -> (u32, u32) {
        match *self {
            Extent::Points { lo, hi } => (lo - 1, hi),
            Extent::Gap(g) => (g, g),
        }
    }

    pub fn has_points(&self) -> bool {
        matches!(self, Extent::Points { .. })
    }

    pub fn point_count(&self) -> u32 {
        match *self {
            Extent::Points { lo, hi } => hi + 1 - lo,
            Extent::Gap(_) => 0,
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Extent::Points { lo, hi } if lo == hi => write!(f, "{lo}"),
            Extent::Points { lo, hi } => write!(f, "{lo}-{hi}"),
            Extent::Gap(g) => write!(f, "_{g}"),
        }
    }
}

/// A bubble over the lines of `bracket`; `extents[k]` is for line
/// `bracket.lo + k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoBracket {
    pub bracket: Bracket,
    pub extents: Vec<Extent>,
}

/// Relative position of two bubbles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Inside,
    Contains,
    Below,
    Above,
    Apart,
    Crossing,
}

impl TwoBracket {
    pub fn point(line: usize, j: u32) -> Self {
        TwoBracket {
            bracket: Bracket::new(line, line),
            extents: vec![Extent::Points { lo: j, hi: j }],
        }
    }

    /// All points of every line of `b`.
    pub fn full(n: &NVector, b: &Bracket) -> Self {
        TwoBracket {
            bracket: *b,
            extents: (b.lo..=b.hi)
                .map(|i| match n.at(i) {
                    0 => Extent::Gap(0),
                    k => Extent::Points { lo: 1, hi: k },
                })
                .collect(),
        }
    }

    pub fn extent(&self, line: usize) -> Option<&Extent> {
        if line < self.bracket.lo || line > self.bracket.hi {
            None
        } else {
            self.extents.get(line - self.bracket.lo)
        }
    }

    pub fn point_count(&self) -> u32 {
        self.extents.iter().map(Extent::point_count).sum()
    }

    pub fn is_point(&self) -> bool {
        self.bracket.is_singleton() && self.point_count() == 1
    }

    /// Lines with their cut spans.
    fn spans(&self) -> impl Iterator<Item = (usize, (u32, u32))> + '_ {
        self.extents
            .iter()
            .enumerate()
            .map(move |(k, e)| (self.bracket.lo + k, e.cuts()))
    }

    /// Weight that strictly grows along strict containment.
    fn size_key(&self) -> u32 {
        self.bracket.len() as u32 + self.spans().map(|(_, (lo, hi))| hi - lo).sum::<u32>()
    }

    /// `self` lies inside `other`.
    pub fn is_inside(&self, other: &TwoBracket) -> bool {
        other.bracket.contains(&self.bracket)
            && self.spans().all(|(line, (lo, hi))| {
                let (plo, phi) = other.extent(line).unwrap().cuts();
                plo <= lo && hi <= phi
            })
    }

    fn relation(&self, other: &TwoBracket) -> Relation {
        if self.is_inside(other) {
            return Relation::Inside;
        }
        if other.is_inside(self) {
            return Relation::Contains;
        }
        let shared = self.bracket.lo.max(other.bracket.lo)..=self.bracket.hi.min(other.bracket.hi);
        if shared.is_empty() {
            return Relation::Apart;
        }
        let mut below = true;
        let mut above = true;
        for line in shared {
            let (lo, hi) = self.extent(line).unwrap().cuts();
            let (olo, ohi) = other.extent(line).unwrap().cuts();
            below &= hi <= olo;
            above &= ohi <= lo;
        }
        match (below, above) {
            (true, _) => Relation::Below,
            (false, true) => Relation::Above,
            _ => Relation::Crossing,
        }
    }

    /// Nested, or disjoint with a consistent stacking order.
    pub fn compatible(&self, other: &TwoBracket) -> bool {
        self.relation(other) != Relation::Crossing
    }

    fn check_shape(&self, n: &NVector) -> Result<(), TwoAssocError> {
        let b = self.bracket;
        if b.lo < 1 || b.hi > n.r() || b.lo > b.hi {
            return Err(TwoAssocError::Malformed(format!("bracket {b} out of range")));
        }
        if self.extents.len() != b.len() {
            return Err(TwoAssocError::Malformed(format!(
                "2-bracket over {b} has {} extents",
                self.extents.len()
            )));
        }
        for (k, e) in self.extents.iter().enumerate() {
            let line = b.lo + k;
            let ok = match *e {
                Extent::Points { lo, hi } => 1 <= lo && lo <= hi && hi <= n.at(line),
                Extent::Gap(g) => g <= n.at(line),
            };
            if !ok {
                return Err(TwoAssocError::Malformed(format!(
                    "extent {e} out of range on line {line} ({} points)",
                    n.at(line)
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TwoBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.extents.iter().map(Extent::to_string).collect();
        write!(f, "[{}..{}:{}]", self.bracket.lo, self.bracket.hi, parts.join(","))
    }
}

/// A face of `W_n`: brackets of lines plus bubbles. Point singletons and the
/// maximal bubble are stored explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoBracketing {
    n: NVector,
    bracketing: Bracketing,
    two_brackets: BTreeSet<TwoBracket>,
}

#[derive(Serialize, Deserialize)]
struct ExtentDoc {
    line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<[u32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct TwoBracketDoc {
    #[serde(rename = "B")]
    b: [usize; 2],
    extents: Vec<ExtentDoc>,
}

#[derive(Serialize, Deserialize)]
struct TwoBracketingDoc {
    n: Vec<u32>,
    brackets: Vec<[usize; 2]>,
    two_brackets: Vec<TwoBracketDoc>,
}

/// Parent/children structure of a valid family.
struct Nest {
    members: Vec<TwoBracket>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl TwoBracketing {
    /// Builds and validates.
    pub fn new(
        n: NVector,
        bracketing: Bracketing,
        two_brackets: impl IntoIterator<Item = TwoBracket>,
    ) -> Result<Self, TwoAssocError> {
        let tb = TwoBracketing {
            n,
            bracketing,
            two_brackets: two_brackets.into_iter().collect(),
        };
        tb.validate()?;
        Ok(tb)
    }

    pub fn n(&self) -> &NVector {
        &self.n
    }

    pub fn bracketing(&self) -> &Bracketing {
        &self.bracketing
    }

    pub fn two_brackets(&self) -> &BTreeSet<TwoBracket> {
        &self.two_brackets
    }

    /// The top face: only forced brackets and bubbles.
    pub fn top(n: &NVector) -> TwoBracketing {
        let bracketing = Bracketing::top(n.r());
        let two_brackets = forced(n);
        TwoBracketing {
            n: n.clone(),
            bracketing,
            two_brackets,
        }
    }

    /// Checks every defining condition, reporting the first failure.
    pub fn validate(&self) -> Result<(), TwoAssocError> {
        self.nest().map(|_| ())
    }

    fn nest(&self) -> Result<Nest, TwoAssocError> {
        let n = &self.n;
        for tb in &self.two_brackets {
            tb.check_shape(n)?;
        }
        if self.bracketing.r() != n.r() {
            return Err(violation(
                Condition::Bracketing,
                format!("bracketing of {} lines for {} entries", self.bracketing.r(), n.r()),
            ));
        }

        for tb in &self.two_brackets {
            if !self.bracketing.contains(&tb.bracket) {
                return Err(violation(
                    Condition::Projection,
                    format!("{tb} lies over {}, which is not a bracket", tb.bracket),
                ));
            }
        }
        for b in self.bracketing.brackets() {
            if n.has_points(b) && !self.two_brackets.iter().any(|tb| tb.bracket == *b) {
                return Err(violation(
                    Condition::Projection,
                    format!("no 2-bracket lies over {b}"),
                ));
            }
        }

        for f in forced(n) {
            if !self.two_brackets.contains(&f) {
                return Err(violation(Condition::Forced, format!("{f} is missing")));
            }
        }
        if let Some(tb) = self.two_brackets.iter().find(|tb| tb.point_count() == 0) {
            return Err(violation(Condition::Forced, format!("{tb} encloses no point")));
        }

        let members: Vec<TwoBracket> = self.two_brackets.iter().cloned().collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if !a.compatible(b) {
                    return Err(violation(Condition::Nesting, format!("{a} and {b} cross")));
                }
            }
        }

        let root_tb = TwoBracket::full(n, &self.bracketing.full());
        let root = members.iter().position(|m| *m == root_tb).unwrap();
        let mut children = vec![Vec::new(); members.len()];
        for (i, c) in members.iter().enumerate() {
            if i == root {
                continue;
            }
            let parent = members
                .iter()
                .enumerate()
                .filter(|&(j, p)| j != i && c.is_inside(p))
                .min_by_key(|(_, p)| p.size_key())
                .map(|(j, _)| j)
                .expect("everything lies inside the maximal bubble");
            children[parent].push(i);
        }

        for (i, kids) in children.iter().enumerate() {
            if kids.is_empty() {
                continue;
            }
            let b = members[i].bracket;
            let subs = self.bracketing.children_of(&b);
            let mut vertical = 0;
            for &c in kids {
                let cb = members[c].bracket;
                if cb == b {
                    vertical += 1;
                } else if !(b.len() > 1 && subs.contains(&cb)) {
                    return Err(violation(
                        Condition::Refinement,
                        format!(
                            "{} lies directly inside {} but {cb} is not a maximal sub-bracket of {b}",
                            members[c], members[i]
                        ),
                    ));
                }
            }
            if vertical > 0 && vertical < kids.len() {
                return Err(violation(
                    Condition::Unfused,
                    format!("{} mixes children over {b} and below it", members[i]),
                ));
            }
            if vertical == 1 {
                return Err(violation(
                    Condition::Unfused,
                    format!("{} has a single child over its own bracket", members[i]),
                ));
            }
        }

        Ok(Nest {
            members,
            children,
            root,
        })
    }

    /// Dimension read off the bubble tree: each bubble contributes like a
    /// concatenation of its children.
    pub fn dim(&self) -> Result<i64, TwoAssocError> {
        let nest = self.nest()?;
        Ok(self.bubble_dim(&nest, nest.root))
    }

    fn bubble_dim(&self, nest: &Nest, i: usize) -> i64 {
        let kids = &nest.children[i];
        if kids.is_empty() {
            return 0;
        }
        let b = nest.members[i].bracket;
        let child_sum: i64 = kids.iter().map(|&c| self.bubble_dim(nest, c)).sum();
        let vertical = nest.members[kids[0]].bracket == b;
        if vertical {
            let a = kids.len() as i64;
            a - 2 + child_sum - (a - 1) * self.bracketing.subtree_dim(&b)
        } else {
            let subs = self.bracketing.children_of(&b);
            let k = subs.len() as i64;
            let mut total = child_sum + k - 3;
            for s in &subs {
                let a_i = kids.iter().filter(|&&c| nest.members[c].bracket == *s).count() as i64;
                total += a_i - (a_i - 1) * self.bracketing.subtree_dim(s);
            }
            total
        }
    }

    /// The image in `K_r`.
    pub fn forgetful_map(&self) -> &Bracketing {
        &self.bracketing
    }

    /// Brackets that are neither singletons nor full, and bubbles that are
    /// neither point singletons nor maximal.
    pub fn removables(&self) -> (Vec<Bracket>, Vec<TwoBracket>) {
        let max = TwoBracket::full(&self.n, &self.bracketing.full());
        let bubbles = self
            .two_brackets
            .iter()
            .filter(|tb| !tb.is_point() && **tb != max)
            .cloned()
            .collect();
        (self.bracketing.removable(), bubbles)
    }

    /// The face over `n(B)` keeping only the bubbles over `B`, with lines of
    /// `B` renumbered from 1.
    pub fn restrict_to_bracket(&self, b: &Bracket) -> Result<TwoBracketing, TwoAssocError> {
        if !self.bracketing.contains(b) {
            return Err(TwoAssocError::NotMember(*b));
        }
        let n = self
            .n
            .restrict(b)
            .ok_or_else(|| TwoAssocError::BadN(format!("{b} carries no points")))?;
        let shift = b.lo - 1;
        let bracketing = Bracketing::top(b.len());
        let mut two_brackets = forced(&n);
        for tb in self.two_brackets.iter().filter(|tb| tb.bracket == *b) {
            two_brackets.insert(TwoBracket {
                bracket: Bracket::new(b.lo - shift, b.hi - shift),
                extents: tb.extents.clone(),
            });
        }
        TwoBracketing::new(n, bracketing, two_brackets)
    }

    /// For a single line, reads the bubbles as brackets of points. This is
    /// the identification of `W_(n)` with `K_n`.
    pub fn point_bracketing(&self) -> Option<Bracketing> {
        if self.n.r() != 1 {
            return None;
        }
        let brackets = self.two_brackets.iter().map(|tb| match tb.extents[0] {
            Extent::Points { lo, hi } => Bracket::new(lo as usize, hi as usize),
            Extent::Gap(_) => unreachable!("valid faces have no empty bubbles"),
        });
        Bracketing::new(self.n.at(1) as usize, brackets).ok()
    }

    /// Reverse inclusion of brackets and bubbles.
    pub fn le(&self, other: &TwoBracketing) -> bool {
        self.n == other.n
            && self.bracketing.le(&other.bracketing)
            && other.two_brackets.is_subset(&self.two_brackets)
    }

    /// Canonical text: the tree, then the removable bubbles.
    pub fn label(&self) -> String {
        let mut out = self.bracketing.to_string();
        for tb in self.removables().1 {
            out.push(' ');
            out.push_str(&tb.to_string());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut brackets: Vec<[usize; 2]> = (1..=self.n.r()).map(|i| [i, i]).collect();
        brackets.extend(self.bracketing.brackets().iter().map(|b| [b.lo, b.hi]));
        brackets.sort();
        let doc = TwoBracketingDoc {
            n: self.n.entries().to_vec(),
            brackets,
            two_brackets: self
                .two_brackets
                .iter()
                .map(|tb| TwoBracketDoc {
                    b: [tb.bracket.lo, tb.bracket.hi],
                    extents: tb
                        .extents
                        .iter()
                        .enumerate()
                        .map(|(k, e)| {
                            let line = tb.bracket.lo + k;
                            match *e {
                                Extent::Points { lo, hi } => ExtentDoc {
                                    line,
                                    points: Some([lo, hi]),
                                    gap: None,
                                },
                                Extent::Gap(g) => ExtentDoc {
                                    line,
                                    points: None,
                                    gap: Some(g),
                                },
                            }
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("2-bracketing documents always serialise")
    }

    pub fn from_json(text: &str) -> Result<TwoBracketing, TwoAssocError> {
        let doc: TwoBracketingDoc =
            serde_json::from_str(text).map_err(|e| TwoAssocError::Malformed(e.to_string()))?;
        let n = NVector::new(doc.n)?;
        let bracketing = Bracketing::new(
            n.r(),
            doc.brackets.iter().map(|&[lo, hi]| Bracket::new(lo, hi)),
        )?;
        let mut two_brackets = Vec::new();
        for tbd in doc.two_brackets {
            let bracket = Bracket::new(tbd.b[0], tbd.b[1]);
            let mut extents = Vec::new();
            for (k, e) in tbd.extents.iter().enumerate() {
                if e.line != bracket.lo + k {
                    return Err(TwoAssocError::Malformed(format!(
                        "extent for line {} out of order in {bracket}",
                        e.line
                    )));
                }
                extents.push(match (e.points, e.gap) {
                    (Some([lo, hi]), None) => Extent::Points { lo, hi },
                    (None, Some(g)) => Extent::Gap(g),
                    _ => {
                        return Err(TwoAssocError::Malformed(
                            "extent needs exactly one of points or gap".into(),
                        ))
                    }
                });
            }
            two_brackets.push(TwoBracket { bracket, extents });
        }
        TwoBracketing::new(n, bracketing, two_brackets)
    }
}

impl fmt::Display for TwoBracketing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Point singletons and the maximal bubble.
fn forced(n: &NVector) -> BTreeSet<TwoBracket> {
    let mut out: BTreeSet<TwoBracket> = (1..=n.r())
        .flat_map(|i| (1..=n.at(i)).map(move |j| TwoBracket::point(i, j)))
        .collect();
    out.insert(TwoBracket::full(n, &Bracket::new(1, n.r())));
    out
}

/// Every bubble over `b` that encloses at least one point.
fn bubbles_over(n: &NVector, b: &Bracket) -> Vec<TwoBracket> {
    let mut out = vec![Vec::new()];
    for line in b.lo..=b.hi {
        let k = n.at(line);
        let mut choices: Vec<Extent> = (0..=k).map(Extent::Gap).collect();
        for lo in 1..=k {
            for hi in lo..=k {
                choices.push(Extent::Points { lo, hi });
            }
        }
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Extent>| {
                choices.iter().map(move |&e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|extents| TwoBracket {
            bracket: *b,
            extents,
        })
        .filter(|tb| tb.point_count() > 0)
        .collect()
}

/// Caps for [`enumerate_wn`].
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Maximum number of faces.
    pub max_faces: usize,
    /// Maximum number of removable members in one face.
    pub max_removable: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_faces: 250_000,
            max_removable: 24,
        }
    }
}

/// `W_n` as a ranked poset.
#[derive(Debug, Clone)]
pub struct WPoset {
    pub n: NVector,
    pub poset: RankedPoset,
    pub elements: Vec<TwoBracketing>,
}

impl WPoset {
    /// Tree text of the image of each element in `K_r`.
    pub fn tree_labels(&self) -> Vec<String> {
        self.elements
            .iter()
            .map(|e| e.bracketing().to_string())
            .collect()
    }

    /// Number of faces over each tree, by rank.
    pub fn fiber_counts(&self) -> BTreeMap<String, BTreeMap<i64, usize>> {
        let mut out: BTreeMap<String, BTreeMap<i64, usize>> = BTreeMap::new();
        for (i, label) in self.tree_labels().into_iter().enumerate() {
            *out.entry(label)
                .or_default()
                .entry(self.poset.rank(i))
                .or_insert(0) += 1;
        }
        out
    }

    /// Position of each element's image in `k`, which must be `K_r` for the
    /// same `r`.
    pub fn forgetful_indices(&self, k: &KPoset) -> Result<Vec<usize>, TwoAssocError> {
        self.elements
            .iter()
            .map(|e| {
                k.index_of(e.bracketing()).ok_or_else(|| {
                    TwoAssocError::Malformed(format!("{} is not in the given K_r", e.bracketing()))
                })
            })
            .collect()
    }

    pub fn top(&self) -> usize {
        let top = TwoBracketing::top(&self.n);
        self.elements
            .iter()
            .position(|e| *e == top)
            .expect("the top face is always enumerated")
    }
}

/// All faces lying over one bracketing, by depth-first search over
/// pairwise-compatible optional bubbles.
fn faces_over(
    n: &NVector,
    bracketing: &Bracketing,
    limit: usize,
    out: &mut Vec<TwoBracketing>,
) -> Result<(), TwoAssocError> {
    let core = forced(n);
    let mut candidates: Vec<TwoBracket> = Vec::new();
    let mut members: Vec<Bracket> = (1..=n.r()).map(|i| Bracket::new(i, i)).collect();
    members.extend(bracketing.brackets().iter().copied());
    for b in &members {
        if n.has_points(b) {
            candidates.extend(
                bubbles_over(n, b)
                    .into_iter()
                    .filter(|c| !core.contains(c) && core.iter().all(|f| f.compatible(c))),
            );
        }
    }
    // Containers first: a chosen bubble's parent is then final, so a bad
    // parent or a mix of children prunes the whole branch.
    candidates.sort_by_key(|c| std::cmp::Reverse(c.size_key()));
    let m = candidates.len();
    let compat: Vec<Vec<bool>> = candidates
        .iter()
        .map(|a| candidates.iter().map(|b| a.compatible(b)).collect())
        .collect();

    struct Search<'a> {
        n: &'a NVector,
        bracketing: &'a Bracketing,
        core: &'a BTreeSet<TwoBracket>,
        candidates: &'a [TwoBracket],
        compat: &'a [Vec<bool>],
        chosen: Vec<usize>,
        // parent of each chosen bubble and whether it sits over the same bracket
        placed: Vec<Option<(TwoBracket, bool)>>,
        limit: usize,
    }

    impl Search<'_> {
        fn run(&mut self, next: usize, out: &mut Vec<TwoBracketing>) -> Result<(), TwoAssocError> {
            if next == self.candidates.len() {
                let mut two_brackets = self.core.clone();
                two_brackets.extend(self.chosen.iter().map(|&i| self.candidates[i].clone()));
                let tb = TwoBracketing {
                    n: self.n.clone(),
                    bracketing: self.bracketing.clone(),
                    two_brackets,
                };
                if tb.validate().is_ok() {
                    if out.len() >= self.limit {
                        return Err(TwoAssocError::TooLarge(self.limit));
                    }
                    out.push(tb);
                }
                return Ok(());
            }
            self.run(next + 1, out)?;
            if !self.chosen.iter().all(|&c| self.compat[c][next]) {
                return Ok(());
            }
            let placed = self.place(next);
            if let Some((parent, vertical)) = &placed {
                let cb = self.candidates[next].bracket;
                if !vertical
                    && !(parent.bracket.len() > 1
                        && self.bracketing.children_of(&parent.bracket).contains(&cb))
                {
                    return Ok(());
                }
                let mixed = self
                    .placed
                    .iter()
                    .flatten()
                    .any(|(p, v)| p == parent && v != vertical);
                if mixed {
                    return Ok(());
                }
            }
            self.chosen.push(next);
            self.placed.push(placed);
            self.run(next + 1, out)?;
            self.chosen.pop();
            self.placed.pop();
            Ok(())
        }

        // None when the smallest container is not unique
        fn place(&self, next: usize) -> Option<(TwoBracket, bool)> {
            let c = &self.candidates[next];
            let containers: Vec<&TwoBracket> = self
                .core
                .iter()
                .chain(self.chosen.iter().map(|&i| &self.candidates[i]))
                .filter(|p| c.is_inside(p))
                .collect();
            let least = containers.iter().map(|p| p.size_key()).min()?;
            let mut smallest = containers.into_iter().filter(|p| p.size_key() == least);
            let parent = smallest.next()?;
            if smallest.next().is_some() {
                return None;
            }
            Some((parent.clone(), parent.bracket == c.bracket))
        }
    }

    let mut search = Search {
        n,
        bracketing,
        core: &core,
        candidates: &candidates,
        compat: &compat,
        chosen: Vec::with_capacity(m),
        placed: Vec::with_capacity(m),
        limit,
    };
    search.run(0, out)
}

/// Enumerates `W_n`, orders it by reverse inclusion and ranks it by height.
///
/// Fails if the result is not graded, has more than one maximum, or if a
/// height disagrees with the dimension read off the bubble tree.
pub fn enumerate_wn(n: &NVector) -> Result<WPoset, TwoAssocError> {
    enumerate_wn_with(n, Limits::default())
}

pub fn enumerate_wn_with(n: &NVector, limits: Limits) -> Result<WPoset, TwoAssocError> {
    let k = enumerate_kr(n.r())?;
    let mut faces = Vec::new();
    for b in &k.elements {
        faces_over(n, b, limits.max_faces, &mut faces)?;
    }
    let mut keyed: Vec<(String, TwoBracketing)> =
        faces.into_iter().map(|f| (f.label(), f)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let (labels, elements): (Vec<String>, Vec<TwoBracketing>) = keyed.into_iter().unzip();
    let count = elements.len();

    // Each face as the sorted ids of its removable members.
    let mut universe: HashMap<Member, u32> = HashMap::new();
    let mut member_sets: Vec<Vec<u32>> = Vec::with_capacity(count);
    for e in &elements {
        let (brackets, bubbles) = e.removables();
        let mut ids: Vec<u32> = brackets
            .into_iter()
            .map(Member::Bracket)
            .chain(bubbles.into_iter().map(Member::Bubble))
            .map(|m| {
                let next = universe.len() as u32;
                *universe.entry(m).or_insert(next)
            })
            .collect();
        ids.sort_unstable();
        if ids.len() > limits.max_removable {
            return Err(TwoAssocError::TooLarge(limits.max_faces));
        }
        member_sets.push(ids);
    }
    let distinct: HashSet<&[u32]> = member_sets.iter().map(Vec::as_slice).collect();
    if distinct.len() != count {
        return Err(TwoAssocError::Malformed(
            "two faces share the same removable members".into(),
        ));
    }

    // Y covers X iff Y's members are a maximal proper subset of X's among
    // faces. Sub-faces are found by counting hits through member postings.
    let mut postings: Vec<Vec<usize>> = vec![Vec::new(); universe.len()];
    let mut bare = Vec::new();
    for (y, set) in member_sets.iter().enumerate() {
        if set.is_empty() {
            bare.push(y);
        }
        for &m in set {
            postings[m as usize].push(y);
        }
    }
    let mut covers = Vec::new();
    let mut hits = vec![0u32; count];
    let mut touched = Vec::new();
    for (x, set) in member_sets.iter().enumerate() {
        for &m in set {
            for &y in &postings[m as usize] {
                if hits[y] == 0 {
                    touched.push(y);
                }
                hits[y] += 1;
            }
        }
        let mut below: Vec<usize> = bare.iter().copied().filter(|&y| y != x).collect();
        for &y in &touched {
            if y != x && hits[y] as usize == member_sets[y].len() {
                below.push(y);
            }
            hits[y] = 0;
        }
        touched.clear();
        below.sort_by_key(|&y| (std::cmp::Reverse(member_sets[y].len()), y));
        let mut kept: Vec<usize> = Vec::new();
        for y in below {
            if !kept.iter().any(|&z| is_subset(&member_sets[y], &member_sets[z])) {
                kept.push(y);
            }
        }
        kept.sort_unstable();
        covers.extend(kept.into_iter().map(|y| (x, y)));
    }

    let mut ascending: Vec<usize> = (0..count).collect();
    ascending.sort_by_key(|&e| std::cmp::Reverse(member_sets[e].len()));
    let ranks = heights(count, &covers, &ascending);
    for &(lo, hi) in &covers {
        if ranks[hi] != ranks[lo] + 1 {
            return Err(TwoAssocError::NotGraded(format!(
                "{} -> {} jumps from height {} to {}",
                labels[lo], labels[hi], ranks[lo], ranks[hi]
            )));
        }
    }
    for (i, e) in elements.iter().enumerate() {
        let dim = e.dim()?;
        if dim != ranks[i] {
            return Err(TwoAssocError::DimMismatch(format!(
                "{} has height {} but bubble dimension {dim}",
                labels[i], ranks[i]
            )));
        }
    }
    let poset = RankedPoset::from_covers(ranks, labels, covers)?;
    let maxima = poset.maximal_elements();
    if maxima.len() != 1 || poset.rank(maxima[0]) != n.top_dim() {
        return Err(TwoAssocError::NotGraded(format!(
            "{} maximal faces, expected one at rank {}",
            maxima.len(),
            n.top_dim()
        )));
    }
    Ok(WPoset {
        n: n.clone(),
        poset,
        elements,
    })
}

// both sorted
fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut it = b.iter();
    a.iter().all(|v| it.any(|w| w == v))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Member {
    Bracket(Bracket),
    Bubble(TwoBracket),
}

/// `sum P_ij - sum (a_i - 1) p_i + |a| + k - 3`: the dimension of a
/// concatenation of tree-pairs of dimensions `P_ij` over trees of
/// dimensions `p_i`.
pub fn dim_2concat(p: &[i64], a: &[usize], dims: &[Vec<i64>]) -> Result<i64, TwoAssocError> {
    let k = p.len();
    if a.len() != k || dims.len() != k {
        return Err(TwoAssocError::Malformed(format!(
            "{k} trees, {} multiplicities, {} dimension lists",
            a.len(),
            dims.len()
        )));
    }
    if let Some(i) = (0..k).find(|&i| dims[i].len() != a[i]) {
        return Err(TwoAssocError::Malformed(format!(
            "block {i} has multiplicity {} but {} dimensions",
            a[i],
            dims[i].len()
        )));
    }
    if k == 1 && a[0] == 1 {
        return Err(TwoAssocError::Malformed(
            "a single tree-pair is not a concatenation".into(),
        ));
    }
    let total: i64 = dims.iter().flatten().sum();
    let correction: i64 = (0..k).map(|i| (a[i] as i64 - 1) * p[i]).sum();
    let size: i64 = a.iter().map(|&v| v as i64).sum();
    Ok(total - correction + size + k as i64 - 3)
}

/// One nonzero term of the `W` recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// `true` for the branch that stacks copies over the same tree.
    pub vertical: bool,
    /// Multiplicity per root branch (a single entry when vertical).
    pub a: Vec<usize>,
    /// Dimension of every factor, grouped like `a`.
    pub dims: Vec<Vec<i64>>,
    /// Point vector of every factor, grouped like `a`.
    pub parts: Vec<Vec<Vec<u32>>>,
    pub count: BigInt,
}

/// Memoised face counts `#{F in W_n : pi(F) = T, d(F) = m}` from the
/// concatenation recurrence.
#[derive(Debug, Default)]
pub struct WCounter {
    k: KCounter,
    counts: DashMap<(Tree, usize, Vec<u32>), BigInt>,
    // ordered a-tuples of faces over one tree with summed dimension and points
    sequences: DashMap<(Tree, usize, usize, Vec<u32>), BigInt>,
}

fn top_dim_of(r: usize, n: &[u32]) -> usize {
    (n.iter().sum::<u32>() as i64 + r as i64 - 3).max(0) as usize
}

/// Ordered compositions of `n` into `parts` nonzero vectors.
fn vector_compositions(n: &[u32], parts: usize) -> Vec<Vec<Vec<u32>>> {
    if parts == 0 {
        return if n.iter().all(|&v| v == 0) {
            vec![vec![]]
        } else {
            vec![]
        };
    }
    let mut out = Vec::new();
    for first in sub_vectors(n) {
        if first.iter().all(|&v| v == 0) {
            continue;
        }
        let rest: Vec<u32> = n.iter().zip(&first).map(|(a, b)| a - b).collect();
        for mut tail in vector_compositions(&rest, parts - 1) {
            tail.insert(0, first.clone());
            out.push(tail);
        }
    }
    out
}

/// Every vector `v` with `0 <= v <= n` entrywise.
fn sub_vectors(n: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &k in n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=k).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

impl WCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn k_counter(&self) -> &KCounter {
        &self.k
    }

    pub fn count_w(&self, tree: &Tree, m: usize, n: &[u32]) -> Result<BigInt, TwoAssocError> {
        if tree.leaf_count() != n.len() {
            return Err(TwoAssocError::Shape {
                leaves: tree.leaf_count(),
                entries: n.len(),
            });
        }
        Ok(self.count(tree, m, n))
    }

    fn count(&self, tree: &Tree, m: usize, n: &[u32]) -> BigInt {
        if n.iter().all(|&v| v == 0) || m > top_dim_of(n.len(), n) {
            return BigInt::zero();
        }
        let key = (tree.clone(), m, n.to_vec());
        if let Some(v) = self.counts.get(&key) {
            return v.clone();
        }
        let value = match tree {
            Tree::Leaf => self.k.count_k(m, n[0] as usize),
            Tree::Node(branches) => {
                let p = tree.dim();
                let total = n.iter().sum::<u32>() as usize;
                let mut sum = BigInt::zero();
                for a in 2..=total {
                    let target = m as i64 + (a as i64 - 1) * p - a as i64 + 2;
                    if target >= 0 {
                        sum += self.sequence(tree, a, target as usize, n);
                    }
                }
                sum += self.horizontal(tree, branches, m, n);
                sum
            }
        };
        self.counts.insert(key, value.clone());
        value
    }

    fn horizontal(&self, tree: &Tree, branches: &[Tree], m: usize, n: &[u32]) -> BigInt {
        let k = branches.len() as i64;
        let p_sum: i64 = branches.iter().map(Tree::dim).sum();
        let mut blocks = Vec::with_capacity(branches.len());
        let mut offset = 0;
        for t in branches {
            blocks.push(&n[offset..offset + t.leaf_count()]);
            offset += t.leaf_count();
        }
        debug_assert_eq!(tree.dim(), p_sum + k - 2);
        // (block index, multiplicities so far) -> depth-first over blocks
        let mut total = BigInt::zero();
        let mut a = vec![0usize; branches.len()];
        self.horizontal_rec(branches, &blocks, 0, &mut a, m as i64, p_sum, k, &mut total);
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn horizontal_rec(
        &self,
        branches: &[Tree],
        blocks: &[&[u32]],
        i: usize,
        a: &mut Vec<usize>,
        m: i64,
        p_sum: i64,
        k: i64,
        total: &mut BigInt,
    ) {
        if i == branches.len() {
            let target = m
                + a.iter()
                    .zip(branches)
                    .map(|(&ai, t)| ai as i64 * (t.dim() - 1))
                    .sum::<i64>()
                - p_sum
                - k
                + 3;
            if target < 0 {
                return;
            }
            *total += self.split_dims(branches, blocks, a, 0, target as usize);
            return;
        }
        let points = blocks[i].iter().sum::<u32>() as usize;
        let range = if points == 0 { 0..=0 } else { 1..=points };
        for ai in range {
            a[i] = ai;
            self.horizontal_rec(branches, blocks, i + 1, a, m, p_sum, k, total);
        }
        a[i] = 0;
    }

    /// Distributes `target` over the blocks.
    fn split_dims(
        &self,
        branches: &[Tree],
        blocks: &[&[u32]],
        a: &[usize],
        i: usize,
        target: usize,
    ) -> BigInt {
        if i == branches.len() {
            return if target == 0 { BigInt::one() } else { BigInt::zero() };
        }
        let mut total = BigInt::zero();
        for here in 0..=target {
            let s = self.sequence(&branches[i], a[i], here, blocks[i]);
            if s.is_zero() {
                continue;
            }
            total += s * self.split_dims(branches, blocks, a, i + 1, target - here);
        }
        total
    }

    /// Ordered `a`-tuples of faces over `tree` with nonzero point vectors
    /// summing to `n` and dimensions summing to `dims`.
    fn sequence(&self, tree: &Tree, a: usize, dims: usize, n: &[u32]) -> BigInt {
        if a == 0 {
            return if dims == 0 && n.iter().all(|&v| v == 0) {
                BigInt::one()
            } else {
                BigInt::zero()
            };
        }
        if a == 1 {
            return self.count(tree, dims, n);
        }
        let key = (tree.clone(), a, dims, n.to_vec());
        if let Some(v) = self.sequences.get(&key) {
            return v.clone();
        }
        let mut total = BigInt::zero();
        for first in sub_vectors(n) {
            if first.iter().all(|&v| v == 0) || first == n {
                continue;
            }
            let rest: Vec<u32> = n.iter().zip(&first).map(|(x, y)| x - y).collect();
            for d in 0..=dims.min(top_dim_of(n.len(), &first)) {
                let head = self.count(tree, d, &first);
                if head.is_zero() {
                    continue;
                }
                total += head * self.sequence(tree, a - 1, dims - d, &rest);
            }
        }
        self.sequences.insert(key, total.clone());
        total
    }

    /// Every nonzero term of the recurrence for `(tree, m, n)`, spelled out
    /// factor by factor. Exponential; meant for small instances.
    pub fn branches(&self, tree: &Tree, m: usize, n: &[u32]) -> Result<Vec<Branch>, TwoAssocError> {
        let children = tree.root_decompose()?;
        if tree.leaf_count() != n.len() {
            return Err(TwoAssocError::Shape {
                leaves: tree.leaf_count(),
                entries: n.len(),
            });
        }
        let mut out = Vec::new();
        let total = n.iter().sum::<u32>() as usize;
        let p = tree.dim();

        for a in 2..=total {
            for parts in vector_compositions(n, a) {
                let maxes: Vec<usize> = parts.iter().map(|q| top_dim_of(n.len(), q)).collect();
                for dims in dim_tuples(&maxes) {
                    let dims_i: Vec<i64> = dims.iter().map(|&d| d as i64).collect();
                    if dims_i.iter().sum::<i64>() - (a as i64 - 1) * p + a as i64 - 2 != m as i64 {
                        continue;
                    }
                    let count: BigInt = parts
                        .iter()
                        .zip(&dims)
                        .map(|(q, &d)| self.count(tree, d, q))
                        .product();
                    if !count.is_zero() {
                        out.push(Branch {
                            vertical: true,
                            a: vec![a],
                            dims: vec![dims_i],
                            parts: vec![parts.clone()],
                            count,
                        });
                    }
                }
            }
        }

        let mut blocks = Vec::new();
        let mut offset = 0;
        for t in children {
            blocks.push(n[offset..offset + t.leaf_count()].to_vec());
            offset += t.leaf_count();
        }
        let mut per_block: Vec<Vec<(usize, Vec<Vec<u32>>)>> = Vec::new();
        for block in &blocks {
            let points = block.iter().sum::<u32>() as usize;
            let mut options = Vec::new();
            if points == 0 {
                options.push((0, vec![]));
            } else {
                for ai in 1..=points {
                    for comp in vector_compositions(block, ai) {
                        options.push((ai, comp));
                    }
                }
            }
            per_block.push(options);
        }
        let mut choice: Vec<(usize, Vec<Vec<u32>>)> = Vec::new();
        self.horizontal_branches(children, &per_block, &mut choice, m, &mut out);
        Ok(out)
    }

    fn horizontal_branches(
        &self,
        children: &[Tree],
        per_block: &[Vec<(usize, Vec<Vec<u32>>)>],
        choice: &mut Vec<(usize, Vec<Vec<u32>>)>,
        m: usize,
        out: &mut Vec<Branch>,
    ) {
        let i = choice.len();
        if i == children.len() {
            let a: Vec<usize> = choice.iter().map(|c| c.0).collect();
            let flat: Vec<(usize, &Vec<u32>)> = choice
                .iter()
                .enumerate()
                .flat_map(|(b, c)| c.1.iter().map(move |q| (b, q)))
                .collect();
            let maxes: Vec<usize> = flat
                .iter()
                .map(|(b, q)| top_dim_of(children[*b].leaf_count(), q))
                .collect();
            let p: Vec<i64> = children.iter().map(Tree::dim).collect();
            for dims in dim_tuples(&maxes) {
                let mut grouped = vec![Vec::new(); children.len()];
                for ((b, _), &d) in flat.iter().zip(&dims) {
                    grouped[*b].push(d as i64);
                }
                let Ok(d) = dim_2concat(&p, &a, &grouped) else {
                    continue;
                };
                if d != m as i64 {
                    continue;
                }
                let count: BigInt = flat
                    .iter()
                    .zip(&dims)
                    .map(|((b, q), &dd)| self.count(&children[*b], dd, q))
                    .product();
                if !count.is_zero() {
                    out.push(Branch {
                        vertical: false,
                        a: a.clone(),
                        dims: grouped,
                        parts: choice.iter().map(|c| c.1.clone()).collect(),
                        count,
                    });
                }
            }
            return;
        }
        for option in &per_block[i] {
            choice.push(option.clone());
            self.horizontal_branches(children, per_block, choice, m, out);
            choice.pop();
        }
    }

    /// Pre-loads a value, e.g. from an on-disk cache.
    pub fn seed(&self, tree: &Tree, m: usize, n: &[u32], value: BigInt) {
        self.counts.insert((tree.clone(), m, n.to_vec()), value);
    }

    /// Memoised `(tree, m, n, count)` entries, sorted.
    pub fn entries(&self) -> Vec<(String, usize, Vec<u32>, BigInt)> {
        let mut out: Vec<_> = self
            .counts
            .iter()
            .map(|e| {
                let (t, m, n) = e.key();
                (t.to_string(), *m, n.clone(), e.value().clone())
            })
            .collect();
        out.sort();
        out
    }
}

/// Every tuple `d` with `0 <= d_j <= maxes_j`.
fn dim_tuples(maxes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &mx in maxes {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=mx).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}
