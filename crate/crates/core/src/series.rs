//! Truncated multivariate power series over `Z[t, t^-1]` and the fixed-point
//! solvers for the face-count generating functions `f` and `F_T`.
//!
//! `f(t, x) = sum a_{m,r} t^m x^r` satisfies `f = x + f^2 / (1 - t f)`.
//! For `T = C(T_1, .., T_k)` with `p = d(T)`, `p_i = d(T_i)`:
//!
//! ```text
//! F_T = F_T^2 / (t^p - t F_T) + t^(p-1) (prod_i t^p_i / (t^p_i - t F_{T_i}) - 1)
//! ```
//!
//! Each quotient is expanded as `t^-p * (1 + sum_j (t^(1-p) F)^j)`, so
//! intermediate coefficients may carry negative powers of `t`. Final
//! coefficients are checked to be polynomials with nonnegative coefficients.

use crate::associahedron::Tree;
use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("shape mismatch: ({0} vars, degree {1}) vs ({2} vars, degree {3})")]
    ShapeMismatch(usize, u32, usize, u32),
    #[error("geometric series needs a zero constant term, found {0}")]
    ConstantTerm(String),
    #[error("exponent {n:?} has total degree above the truncation {max_degree}")]
    DegreeOutOfRange { n: Vec<u32>, max_degree: u32 },
    #[error("exponent {n:?} has {got} entries, series has {vars} variables")]
    Arity { n: Vec<u32>, vars: usize, got: usize },
    #[error("coefficient of x^{n:?} is {poly}, not a polynomial in t with nonnegative coefficients")]
    NotCounting { n: Vec<u32>, poly: String },
    #[error("F_T has a constant term {0}")]
    ConstantInSolution(String),
    #[error("truncation degree must be at least 1")]
    ZeroDegree,
}

/// Finite Laurent polynomial in `t` with big-integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    /// `c t^exp`.
    pub fn monomial(exp: i64, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c.into());
        p
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, BigInt::from(c));
        }
        p
    }

    pub fn add_term(&mut self, exp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigInt> {
        &self.terms
    }

    pub fn coefficient(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &other.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Value at `t = -1`.
    pub fn eval_minus_one(&self) -> BigInt {
        self.terms
            .iter()
            .map(|(&e, c)| if e.rem_euclid(2) == 0 { c.clone() } else { -c })
            .sum()
    }

    /// No negative exponents and no negative coefficients.
    pub fn is_counting(&self) -> bool {
        self.terms
            .iter()
            .all(|(&e, c)| e >= 0 && !c.is_negative())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if i == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let unit = mag.is_one();
            match e {
                0 => write!(f, "{mag}")?,
                1 if unit => f.write_str("t")?,
                1 => write!(f, "{mag}t")?,
                _ if unit => write!(f, "t^{e}")?,
                _ => write!(f, "{mag}t^{e}")?,
            }
        }
        Ok(())
    }
}

/// Power series in `x_1..x_vars` truncated above total degree `max_degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: usize,
    max_degree: u32,
    terms: BTreeMap<Vec<u32>, LaurentPoly>,
}

#[derive(Serialize)]
struct SeriesDoc {
    vars: usize,
    max_degree: u32,
    terms: Vec<TermDoc>,
}

#[derive(Serialize)]
struct TermDoc {
    n: Vec<u32>,
    t_poly: Vec<(i64, String)>,
}

fn total(n: &[u32]) -> u32 {
    n.iter().sum()
}

impl TruncatedSeries {
    pub fn zero(vars: usize, max_degree: u32) -> Self {
        TruncatedSeries {
            vars,
            max_degree,
            terms: BTreeMap::new(),
        }
    }

    /// The constant series `c`.
    pub fn constant(vars: usize, max_degree: u32, c: LaurentPoly) -> Self {
        let mut s = Self::zero(vars, max_degree);
        s.add_term(vec![0; vars], c);
        s
    }

    /// `x_i`, 0-based.
    pub fn variable(vars: usize, max_degree: u32, i: usize) -> Self {
        assert!(i < vars, "variable index out of range");
        let mut n = vec![0; vars];
        n[i] = 1;
        let mut s = Self::zero(vars, max_degree);
        s.add_term(n, LaurentPoly::one());
        s
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Nonzero terms keyed by exponent vector.
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, LaurentPoly> {
        &self.terms
    }

    /// Adds `c x^n`; terms above the truncation are dropped.
    pub fn add_term(&mut self, n: Vec<u32>, c: LaurentPoly) {
        debug_assert_eq!(n.len(), self.vars);
        if total(&n) > self.max_degree || c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(n) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars || self.max_degree != other.max_degree {
            return Err(SeriesError::ShapeMismatch(
                self.vars,
                self.max_degree,
                other.vars,
                other.max_degree,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (n, c) in &other.terms {
            out.add_term(n.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.map_coefficients(LaurentPoly::neg))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.vars, self.max_degree);
        for (n1, c1) in &self.terms {
            let d1 = total(n1);
            for (n2, c2) in &other.terms {
                if d1 + total(n2) > self.max_degree {
                    continue;
                }
                let n: Vec<u32> = n1.iter().zip(n2).map(|(a, b)| a + b).collect();
                out.add_term(n, c1.mul(c2));
            }
        }
        Ok(out)
    }

    /// `u + u^2 + u^3 + ..` up to the truncation.
    pub fn geometric_inverse(&self) -> Result<Self, SeriesError> {
        if let Some(c) = self.terms.get(&vec![0; self.vars]) {
            return Err(SeriesError::ConstantTerm(c.to_string()));
        }
        let mut out = Self::zero(self.vars, self.max_degree);
        let mut power = self.clone();
        // every power raises the minimum degree by at least one
        for _ in 0..self.max_degree {
            if power.terms.is_empty() {
                break;
            }
            out = out.add(&power)?;
            power = power.mul(self)?;
        }
        Ok(out)
    }

    pub fn map_coefficients(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        let mut out = Self::zero(self.vars, self.max_degree);
        for (n, c) in &self.terms {
            out.add_term(n.clone(), f(c));
        }
        out
    }

    /// Multiplies by `t^k`.
    pub fn shift_t(&self, k: i64) -> Self {
        self.map_coefficients(|c| c.shift(k))
    }

    /// Terms of total degree at most `d`.
    pub fn truncate(&self, d: u32) -> Self {
        let mut out = self.clone();
        out.terms.retain(|n, _| total(n) <= d);
        out
    }

    /// Places this series into variables `offset..offset + self.vars` of a
    /// series with `vars` variables.
    pub fn embed(&self, vars: usize, offset: usize) -> Self {
        assert!(offset + self.vars <= vars, "embedding out of range");
        let mut out = Self::zero(vars, self.max_degree);
        for (n, c) in &self.terms {
            let mut m = vec![0; vars];
            m[offset..offset + self.vars].copy_from_slice(n);
            out.add_term(m, c.clone());
        }
        out
    }

    /// Laurent coefficient of `x^n` (zero if absent).
    pub fn coefficient_poly(&self, n: &[u32]) -> Result<LaurentPoly, SeriesError> {
        if n.len() != self.vars {
            return Err(SeriesError::Arity {
                n: n.to_vec(),
                vars: self.vars,
                got: n.len(),
            });
        }
        if total(n) > self.max_degree {
            return Err(SeriesError::DegreeOutOfRange {
                n: n.to_vec(),
                max_degree: self.max_degree,
            });
        }
        Ok(self.terms.get(n).cloned().unwrap_or_default())
    }

    /// Coefficient of `t^m x^n`.
    pub fn coefficient(&self, m: i64, n: &[u32]) -> Result<BigInt, SeriesError> {
        Ok(self.coefficient_poly(n)?.coefficient(m))
    }

    /// Substitutes `t = -1`; the result has constant Laurent coefficients.
    pub fn eval_t_minus1(&self) -> Self {
        self.map_coefficients(|c| LaurentPoly::monomial(0, c.eval_minus_one()))
    }

    /// Fails on the first coefficient that is not a counting polynomial.
    pub fn check_counting(&self) -> Result<(), SeriesError> {
        for (n, c) in &self.terms {
            if !c.is_counting() {
                return Err(SeriesError::NotCounting {
                    n: n.clone(),
                    poly: c.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Byte-stable JSON dump; coefficients are decimal strings.
    pub fn to_json(&self) -> String {
        let doc = SeriesDoc {
            vars: self.vars,
            max_degree: self.max_degree,
            terms: self
                .terms
                .iter()
                .map(|(n, c)| TermDoc {
                    n: n.clone(),
                    t_poly: c.terms().iter().map(|(&e, v)| (e, v.to_string())).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("series documents always serialise")
    }
}

/// `1 + geom(u)`.
fn one_over_one_minus(u: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let one = TruncatedSeries::constant(u.vars(), u.max_degree(), LaurentPoly::one());
    one.add(&u.geometric_inverse()?)
}

/// Right-hand side `x + f^2 / (1 - t f)`.
fn f_rhs(f: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let x = TruncatedSeries::variable(1, f.max_degree(), 0);
    let denom = one_over_one_minus(&f.shift_t(1))?;
    x.add(&f.mul(f)?.mul(&denom)?)
}

/// Solves `f = x + f^2 / (1 - t f)` up to degree `max_degree`, one degree at
/// a time: the degree-`d` part of the right-hand side only reads degrees
/// below `d` of `f`.
pub fn solve_f(max_degree: u32) -> Result<TruncatedSeries, SeriesError> {
    if max_degree == 0 {
        return Err(SeriesError::ZeroDegree);
    }
    let mut f = TruncatedSeries::zero(1, max_degree);
    for d in 1..=max_degree {
        f = f_rhs(&f.truncate(d - 1))?.truncate(d);
    }
    f.check_counting()?;
    Ok(f)
}

/// One more application of the `f` equation.
pub fn f_step(f: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    f_rhs(f)
}

/// First coefficient where an identity failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub n: Vec<u32>,
    pub expected: LaurentPoly,
    pub observed: LaurentPoly,
}

/// Checks `(2(1+t) f - 1 - t x)^2 = 1 - 4x - 2tx + t^2 x^2` term by term.
pub fn check_f_closed_form(f: &TruncatedSeries) -> Result<Result<(), Mismatch>, SeriesError> {
    let d = f.max_degree();
    let two_one_plus_t = LaurentPoly::from_terms([(0, 2), (1, 2)]);
    let mut g = f.map_coefficients(|c| c.mul(&two_one_plus_t));
    g.add_term(vec![0], LaurentPoly::from_terms([(0, -1)]));
    g.add_term(vec![1], LaurentPoly::from_terms([(1, -1)]));
    let lhs = g.mul(&g)?;
    let mut rhs = TruncatedSeries::zero(1, d);
    rhs.add_term(vec![0], LaurentPoly::one());
    rhs.add_term(vec![1], LaurentPoly::from_terms([(0, -4), (1, -2)]));
    rhs.add_term(vec![2], LaurentPoly::from_terms([(2, 1)]));
    for k in 0..=d {
        let n = vec![k];
        let expected = rhs.coefficient_poly(&n)?;
        let observed = lhs.coefficient_poly(&n)?;
        if expected != observed {
            return Ok(Err(Mismatch {
                n,
                expected,
                observed,
            }));
        }
    }
    Ok(Ok(()))
}

/// Checks `F_T(-1, x) = (-1)^d(T) (1 / prod(1 - x_i) - 1)` on every
/// exponent with `0 < |n| <= D`.
pub fn check_t_minus1_closed_form(
    tree: &Tree,
    series: &TruncatedSeries,
) -> Result<(), Mismatch> {
    let sign = if tree.dim().rem_euclid(2) == 0 { 1 } else { -1 };
    let at = series.eval_t_minus1();
    for n in exponents(series.vars(), series.max_degree()) {
        let expected = if total(&n) == 0 {
            LaurentPoly::zero()
        } else {
            LaurentPoly::monomial(0, sign)
        };
        let observed = at.terms().get(&n).cloned().unwrap_or_default();
        if expected != observed {
            return Err(Mismatch {
                n,
                expected,
                observed,
            });
        }
    }
    Ok(())
}

/// All exponent vectors with `vars` entries and total degree at most `d`,
/// in lexicographic order.
pub fn exponents(vars: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == vars {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            rec(vars, left - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, d, &mut Vec::new(), &mut out);
    out
}

/// Solves the `F_T` equations at one truncation degree, memoising every
/// subtree's series.
#[derive(Debug)]
pub struct SeriesSolver {
    max_degree: u32,
    solved: DashMap<Tree, Arc<TruncatedSeries>>,
}

impl SeriesSolver {
    pub fn new(max_degree: u32) -> Result<Self, SeriesError> {
        if max_degree == 0 {
            return Err(SeriesError::ZeroDegree);
        }
        Ok(SeriesSolver {
            max_degree,
            solved: DashMap::new(),
        })
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn solve(&self, tree: &Tree) -> Result<Arc<TruncatedSeries>, SeriesError> {
        if let Some(s) = self.solved.get(tree) {
            return Ok(s.clone());
        }
        let series = Arc::new(match tree {
            Tree::Leaf => solve_f(self.max_degree)?,
            Tree::Node(children) => self.solve_node(tree, children)?,
        });
        self.solved.insert(tree.clone(), series.clone());
        Ok(series)
    }

    /// The part of the right-hand side that does not involve `F_T`:
    /// `t^(p-1) (prod_i 1 / (1 - t^(1-p_i) F_{T_i}) - 1)`.
    fn source_term(&self, tree: &Tree, children: &[Tree]) -> Result<TruncatedSeries, SeriesError> {
        let vars = tree.leaf_count();
        let d = self.max_degree;
        let mut product = TruncatedSeries::constant(vars, d, LaurentPoly::one());
        let mut offset = 0;
        for child in children {
            let fi = self.solve(child)?.embed(vars, offset);
            offset += child.leaf_count();
            product = product.mul(&one_over_one_minus(&fi.shift_t(1 - child.dim()))?)?;
        }
        let one = TruncatedSeries::constant(vars, d, LaurentPoly::one());
        Ok(product.sub(&one)?.shift_t(tree.dim() - 1))
    }

    fn node_rhs(
        &self,
        p: i64,
        source: &TruncatedSeries,
        ft: &TruncatedSeries,
    ) -> Result<TruncatedSeries, SeriesError> {
        let denom = one_over_one_minus(&ft.shift_t(1 - p))?;
        let quadratic = ft.mul(ft)?.mul(&denom)?.shift_t(-p);
        quadratic.add(source)
    }

    fn solve_node(&self, tree: &Tree, children: &[Tree]) -> Result<TruncatedSeries, SeriesError> {
        let p = tree.dim();
        let source = self.source_term(tree, children)?;
        let mut ft = TruncatedSeries::zero(tree.leaf_count(), self.max_degree);
        for d in 1..=self.max_degree {
            ft = self.node_rhs(p, &source, &ft.truncate(d - 1))?.truncate(d);
        }
        if let Some(c) = ft.terms().get(&vec![0; ft.vars()]) {
            return Err(SeriesError::ConstantInSolution(c.to_string()));
        }
        ft.check_counting()?;
        Ok(ft)
    }

    /// One more application of the `F_T` equation to an already solved
    /// series, for stability checks.
    pub fn step(&self, tree: &Tree) -> Result<TruncatedSeries, SeriesError> {
        let ft = self.solve(tree)?;
        match tree {
            Tree::Leaf => f_step(&ft),
            Tree::Node(children) => {
                let source = self.source_term(tree, children)?;
                self.node_rhs(tree.dim(), &source, &ft)
            }
        }
    }
}

/// `F_T` truncated at degree `max_degree`.
pub fn solve_big_f(tree: &Tree, max_degree: u32) -> Result<TruncatedSeries, SeriesError> {
    Ok((*SeriesSolver::new(max_degree)?.solve(tree)?).clone())
}
