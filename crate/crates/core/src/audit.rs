//! One-shot verification of the counting and Eulerian identities.
//!
//! Every check becomes a row of an [`AuditReport`]; nothing here returns an
//! error; a failure is a row with `pass == false`.

use crate::associahedron::{enumerate_kr, enumerate_trees};
use crate::poset::{fiber_product, reduced_product, sign_of_rank, FiberFactor, RankedPoset};
use crate::series::{
    check_f_closed_form, check_t_minus1_closed_form, exponents, solve_f, SeriesSolver,
};
use crate::two_assoc::{enumerate_wn, NVector, WCounter, WPoset};
use dashmap::DashMap;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub instance: String,
    /// Named group, e.g. `sublevel` or `superlevel` intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<String>,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: &str,
        instance: impl Into<String>,
        expected: impl ToString,
        observed: impl ToString,
        pass: bool,
    ) -> Self {
        Check {
            name: name.to_string(),
            instance: instance.into(),
            subset: None,
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
        }
    }

    /// Passes when the two sides render the same.
    pub fn equal(name: &str, instance: impl Into<String>, expected: impl ToString, observed: impl ToString) -> Self {
        let (e, o) = (expected.to_string(), observed.to_string());
        let pass = e == o;
        Check::new(name, instance, e, o, pass)
    }

    pub fn in_subset(mut self, subset: &str) -> Self {
        self.subset = Some(subset.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl AuditReport {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
        };
        AuditReport { checks, summary }
    }

    /// Concatenates in the given order.
    pub fn merge(reports: impl IntoIterator<Item = AuditReport>) -> Self {
        AuditReport::from_checks(reports.into_iter().flat_map(|r| r.checks).collect())
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn subset<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Check> {
        self.checks
            .iter()
            .filter(move |c| c.subset.as_deref() == Some(name))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    pub fn to_table(&self) -> String {
        let headers = ["check", "instance", "expected", "observed", "result"];
        let rows: Vec<[String; 5]> = self
            .checks
            .iter()
            .map(|c| {
                let name = match &c.subset {
                    Some(s) => format!("{} [{s}]", c.name),
                    None => c.name.clone(),
                };
                [
                    name,
                    c.instance.clone(),
                    c.expected.clone(),
                    c.observed.clone(),
                    if c.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut widths = headers.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: [&str; 5]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, headers);
        for row in &rows {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3], &row[4]]);
        }
        let s = self.summary;
        let _ = writeln!(out, "{} checks, {} passed, {} failed", s.total, s.passed, s.failed);
        out
    }
}

/// Shared memo tables so that a batch of audits reuses recurrence values
/// and solved series.
#[derive(Debug, Default)]
pub struct Oracles {
    pub counter: WCounter,
    solvers: DashMap<u32, Arc<SeriesSolver>>,
}

impl Oracles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_counter(counter: WCounter) -> Self {
        Oracles {
            counter,
            solvers: DashMap::new(),
        }
    }

    pub fn into_counter(self) -> WCounter {
        self.counter
    }

    pub fn solver(&self, max_degree: u32) -> Arc<SeriesSolver> {
        if let Some(s) = self.solvers.get(&max_degree) {
            return s.clone();
        }
        let s = Arc::new(SeriesSolver::new(max_degree).expect("positive truncation degree"));
        self.solvers.insert(max_degree, s.clone());
        s
    }

    /// One row per `(T, m)` comparing the recurrence, the enumeration and
    /// the series coefficient.
    pub fn counts(&self, n: &NVector, max_degree: u32) -> AuditReport {
        let tag = format!("n=({n})");
        if max_degree < n.total() {
            return AuditReport::from_checks(vec![Check::new(
                "truncation",
                tag,
                format!("D >= {}", n.total()),
                format!("D = {max_degree}"),
                false,
            )]);
        }
        let w = match enumerate_wn(n) {
            Ok(w) => w,
            Err(e) => {
                return AuditReport::from_checks(vec![Check::new(
                    "enumeration",
                    tag,
                    "ok",
                    e,
                    false,
                )])
            }
        };
        let rows = count_rows(&w, &self.counter, &self.solver(max_degree));
        AuditReport::from_checks(
            rows.into_iter()
                .map(|row| {
                    let pass = row.agree();
                    Check::new(
                        "count",
                        format!("{tag} T={} m={}", row.tree, row.m),
                        &row.recurrence,
                        format!("enumerated {}, series {}", row.enumerated, row.series),
                        pass,
                    )
                })
                .collect(),
        )
    }
}

/// One `(T, m)` entry of a three-way count comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub tree: String,
    pub m: i64,
    #[serde(serialize_with = "as_decimal")]
    pub enumerated: BigInt,
    #[serde(serialize_with = "as_decimal")]
    pub recurrence: BigInt,
    #[serde(serialize_with = "as_decimal")]
    pub series: BigInt,
}

fn as_decimal<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl CountRow {
    pub fn agree(&self) -> bool {
        self.enumerated == self.recurrence && self.recurrence == self.series
    }
}

/// Rows for every tree of `K_r` and every rank that any oracle reports.
pub fn count_rows(w: &WPoset, counter: &WCounter, solver: &SeriesSolver) -> Vec<CountRow> {
    let n = &w.n;
    let fibers = w.fiber_counts();
    let mut rows = Vec::new();
    for t in enumerate_trees(n.r()).expect("r >= 1") {
        let label = t.to_string();
        let poly = solver
            .solve(&t)
            .and_then(|f| f.coefficient_poly(n.entries()))
            .expect("truncation covers |n|");
        let mut ms: BTreeSet<i64> = (0..=n.top_dim()).collect();
        ms.extend(poly.terms().keys().copied());
        if let Some(f) = fibers.get(&label) {
            ms.extend(f.keys().copied());
        }
        for m in ms {
            let enumerated = fibers
                .get(&label)
                .and_then(|f| f.get(&m))
                .map_or_else(BigInt::default, |&c| BigInt::from(c));
            let recurrence = if m < 0 {
                BigInt::default()
            } else {
                counter
                    .count_w(&t, m as usize, n.entries())
                    .expect("tree matches n")
            };
            rows.push(CountRow {
                tree: label.clone(),
                m,
                enumerated,
                recurrence,
                series: poly.coefficient(m),
            });
        }
    }
    rows
}

pub fn audit_counts(n: &NVector, max_degree: u32) -> AuditReport {
    Oracles::new().counts(n, max_degree)
}

/// Full Eulerian verification of a completed poset.
pub fn eulerian_checks(instance: &str, completed: &RankedPoset) -> Vec<Check> {
    let report = completed.verify_eulerian();
    vec![
        Check::equal("graded", instance, true, report.graded),
        Check::new(
            "unbalanced intervals",
            instance,
            0,
            format!("{} of {} pairs", report.unbalanced.len(), report.pairs_checked),
            report.unbalanced.is_empty(),
        ),
        Check::equal("diamond", instance, 0, completed.diamond_violations().len()),
        Check::equal("mobius sign", instance, 0, completed.mobius_sign_violations().len()),
        Check::equal("alternating sum", instance, 0, completed.total_alternating_sum()),
    ]
}

/// Eulerian checks on the completion of `W_n`, plus the intervals from the
/// formal minimum up (`sublevel`) and from each face up to the top
/// (`superlevel`) as named subsets.
pub fn audit_eulerian(n: &NVector) -> AuditReport {
    let tag = format!("n=({n})");
    let w = match enumerate_wn(n) {
        Ok(w) => w,
        Err(e) => {
            return AuditReport::from_checks(vec![Check::new("enumeration", tag, "ok", e, false)])
        }
    };
    AuditReport::from_checks(wn_eulerian_checks(&tag, &w))
}

pub fn wn_eulerian_checks(tag: &str, w: &WPoset) -> Vec<Check> {
    let completed = w
        .poset
        .complete_with_min(-1)
        .expect("rank -1 sits below every face");
    let mut checks = eulerian_checks(tag, &completed);
    // completion appends the new minimum, so face ids are unchanged
    let min = w.poset.len();
    let top = w.top();
    let elements = 0..min;
    let sub_bad = elements
        .clone()
        .filter(|&x| completed.alternating_sum(min, x) != Ok(0))
        .count();
    let super_bad = elements
        .clone()
        .filter(|&x| x != top && completed.alternating_sum(x, top) != Ok(0))
        .count();
    let faces = completed.len() - 1;
    checks.push(
        Check::new(
            "unbalanced intervals",
            tag,
            0,
            format!("{sub_bad} of {faces}"),
            sub_bad == 0,
        )
        .in_subset("sublevel"),
    );
    checks.push(
        Check::new(
            "unbalanced intervals",
            tag,
            0,
            format!("{super_bad} of {}", faces - 1),
            super_bad == 0,
        )
        .in_subset("superlevel"),
    );
    checks
}

/// Bounds for [`audit_identities`].
#[derive(Debug, Clone)]
pub struct IdentityConfig {
    pub n_list: Vec<NVector>,
    /// Line counts for the series and fiber-product checks.
    pub r_list: Vec<usize>,
    /// Truncation for the one-variable series.
    pub f_degree: u32,
    /// Truncation for the tree series.
    pub tree_degree: u32,
    /// Fiber products only over `K_r` with `r` at most this.
    pub fiber_max_r: usize,
    pub fiber_factors: usize,
    pub fiber_points: u32,
    /// Reduced products of all bounded graded posets up to this size.
    pub product_elements: usize,
}

pub fn audit_identities(cfg: &IdentityConfig) -> AuditReport {
    let mut checks = Vec::new();

    match solve_f(cfg.f_degree) {
        Ok(f) => {
            let at = f.eval_t_minus1();
            for r in 1..=cfg.f_degree {
                let c = at.coefficient(0, &[r]).unwrap_or_default();
                checks.push(Check::equal("f(-1) coefficient", format!("r={r}"), 1, c));
            }
            let closed = match check_f_closed_form(&f) {
                Ok(Ok(())) => "holds".to_string(),
                Ok(Err(m)) => format!("differs at x^{:?}", m.n),
                Err(e) => e.to_string(),
            };
            checks.push(Check::equal(
                "f closed form",
                format!("D={}", cfg.f_degree),
                "holds",
                closed,
            ));
        }
        Err(e) => checks.push(Check::new("f solve", "", "ok", e, false)),
    }

    let solver = SeriesSolver::new(cfg.tree_degree).expect("positive truncation degree");
    for &r in &cfg.r_list {
        for t in enumerate_trees(r).expect("r >= 1") {
            let observed = match solver.solve(&t) {
                Ok(s) => match check_t_minus1_closed_form(&t, &s) {
                    Ok(()) => "holds".to_string(),
                    Err(m) => format!("differs at x^{:?}", m.n),
                },
                Err(e) => e.to_string(),
            };
            checks.push(Check::equal(
                "F_T(-1) closed form",
                format!("T={t} D={}", cfg.tree_degree),
                "holds",
                observed,
            ));
        }
    }

    let per_n: Vec<Vec<Check>> = cfg
        .n_list
        .par_iter()
        .map(|n| {
            let tag = format!("n=({n})");
            match enumerate_wn(n) {
                Ok(w) => single_fiber_checks(&tag, &w),
                Err(e) => vec![Check::new("enumeration", tag, "ok", e, false)],
            }
        })
        .collect();
    checks.extend(per_n.into_iter().flatten());

    for &r in cfg.r_list.iter().filter(|&&r| r <= cfg.fiber_max_r) {
        checks.extend(fiber_product_checks(r, cfg.fiber_factors, cfg.fiber_points));
    }

    checks.extend(reduced_product_checks(cfg.product_elements));
    AuditReport::from_checks(checks)
}

fn single_fiber_checks(tag: &str, w: &WPoset) -> Vec<Check> {
    let mut checks = Vec::new();
    let completed = w.poset.complete_with_min(-1).expect("rank -1 is below");
    checks.push(Check::equal(
        "A(completed W_n)",
        tag,
        0,
        completed.total_alternating_sum(),
    ));
    let k = enumerate_kr(w.n.r()).expect("r >= 1");
    let image = w.forgetful_indices(&k).expect("same r");
    let mut sums = vec![0i64; k.elements.len()];
    for (x, &t) in image.iter().enumerate() {
        sums[t] += sign_of_rank(w.poset.rank(x));
    }
    for (t, sum) in sums.into_iter().enumerate() {
        checks.push(Check::equal(
            "fiber sum",
            format!("{tag} T={}", k.poset.label(t)),
            sign_of_rank(k.poset.rank(t)),
            sum,
        ));
    }
    checks
}

/// Nonzero point vectors with `r` entries and at most `max_points` points.
pub fn point_vectors(r: usize, max_points: u32) -> Vec<NVector> {
    (1..=max_points)
        .flat_map(|d| exponents(r, d))
        .filter(|e| {
            let s: u32 = e.iter().sum();
            s >= 1 && s <= max_points
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter_map(|e| NVector::new(e).ok())
        .collect()
}

/// Multisets of size `1..=max_factors` drawn from `0..count`.
fn multisets(count: usize, max_factors: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut level: Vec<Vec<usize>> = (0..count).map(|i| vec![i]).collect();
    for _ in 0..max_factors {
        out.extend(level.iter().cloned());
        level = level
            .into_iter()
            .flat_map(|m| {
                let last = *m.last().unwrap();
                (last..count).map(move |i| {
                    let mut next = m.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    out
}

/// `A(W_m1 x_K ... x_K W_mk) = 1`, and each fiber over `T` sums to
/// `(-1)^d(T)`.
pub fn fiber_product_checks(r: usize, max_factors: usize, max_points: u32) -> Vec<Check> {
    let k = enumerate_kr(r).expect("r >= 1");
    let vectors = point_vectors(r, max_points);
    let spaces: Vec<(WPoset, Vec<usize>)> = vectors
        .iter()
        .map(|m| {
            let w = enumerate_wn(m).expect("desk-scale enumeration");
            let image = w.forgetful_indices(&k).expect("same r");
            (w, image)
        })
        .collect();
    multisets(spaces.len(), max_factors)
        .par_iter()
        .flat_map_iter(|choice| {
            let tag = choice
                .iter()
                .map(|&i| format!("({})", vectors[i]))
                .collect::<Vec<_>>()
                .join(" x ");
            let factors: Vec<FiberFactor> = choice
                .iter()
                .map(|&i| FiberFactor {
                    poset: &spaces[i].0.poset,
                    map: &spaces[i].1,
                })
                .collect();
            let mut checks = Vec::new();
            match fiber_product(&factors, &k.poset) {
                Ok(p) => {
                    checks.push(Check::equal(
                        "fiber product A",
                        format!("r={r} {tag}"),
                        1,
                        p.total_alternating_sum(),
                    ));
                    // tuple fibers: product of single-factor fiber sums,
                    // twisted by the rank correction
                    let mut bad = 0;
                    for t in 0..k.elements.len() {
                        let d = k.poset.rank(t);
                        let mut sum = sign_of_rank(-(choice.len() as i64 - 1) * d);
                        for &i in choice {
                            let (w, image) = &spaces[i];
                            sum *= image
                                .iter()
                                .enumerate()
                                .filter(|&(_, &b)| b == t)
                                .map(|(x, _)| sign_of_rank(w.poset.rank(x)))
                                .sum::<i64>();
                        }
                        if sum != sign_of_rank(d) {
                            bad += 1;
                        }
                    }
                    checks.push(Check::new(
                        "fiber product fibers",
                        format!("r={r} {tag}"),
                        "every fiber sums to (-1)^d(T)",
                        format!("{bad} of {} differ", k.elements.len()),
                        bad == 0,
                    ));
                }
                Err(e) => checks.push(Check::new(
                    "fiber product A",
                    format!("r={r} {tag}"),
                    1,
                    e,
                    false,
                )),
            }
            checks
        })
        .collect()
}

/// Every bounded poset whose covers join consecutive ranks, with at most
/// `max_elements` elements and bottom rank `bottom`. Such posets are graded.
/// Isomorphic copies are not removed.
pub fn bounded_graded_posets(max_elements: usize, bottom: i64) -> Vec<RankedPoset> {
    // level widths: a lone point, or 1, middle levels, 1
    let mut shapes: Vec<Vec<usize>> = vec![vec![1]];
    let mut middles: Vec<Vec<usize>> = vec![vec![]];
    while let Some(m) = middles.pop() {
        let used = 2 + m.iter().sum::<usize>();
        if used > max_elements {
            continue;
        }
        shapes.push([vec![1], m.clone(), vec![1]].concat());
        for w in 1..=max_elements - used {
            middles.push([m.clone(), vec![w]].concat());
        }
    }
    shapes.sort();

    let mut out = Vec::new();
    for shape in shapes {
        let mut offsets = vec![0];
        for w in &shape {
            offsets.push(offsets.last().unwrap() + w);
        }
        let ranks: Vec<i64> = shape
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| std::iter::repeat(bottom + i as i64).take(w))
            .collect();
        // per pair of adjacent levels: relations where nobody is isolated
        let mut layers: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
        for i in 0..shape.len().saturating_sub(1) {
            let (a, b) = (shape[i], shape[i + 1]);
            let mut options = Vec::new();
            for mask in 0u32..(1 << (a * b)) {
                let edges: Vec<(usize, usize)> = (0..a * b)
                    .filter(|bit| mask & (1 << bit) != 0)
                    .map(|bit| (offsets[i] + bit / b, offsets[i + 1] + bit % b))
                    .collect();
                let lows_ok = (0..a).all(|x| edges.iter().any(|e| e.0 == offsets[i] + x));
                let highs_ok = (0..b).all(|y| edges.iter().any(|e| e.1 == offsets[i + 1] + y));
                if lows_ok && highs_ok {
                    options.push(edges);
                }
            }
            layers.push(options);
        }
        let mut combos: Vec<Vec<(usize, usize)>> = vec![vec![]];
        for options in &layers {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    options.iter().map(move |o| {
                        let mut next = c.clone();
                        next.extend(o);
                        next
                    })
                })
                .collect();
        }
        for covers in combos {
            let labels = (0..ranks.len()).map(|x| x.to_string()).collect();
            out.push(
                RankedPoset::from_covers(ranks.clone(), labels, covers)
                    .expect("adjacent-level covers"),
            );
        }
    }
    out
}

/// `A(P x~ Q) = (A(P) - e_P)(A(Q) - e_Q) - e_P e_Q` with
/// `e = (-1)^{rank of the minimum}`.
pub fn reduced_product_alternating_sum(p: &RankedPoset, q: &RankedPoset) -> Option<i64> {
    let ep = sign_of_rank(p.rank(p.unique_min()?));
    let eq = sign_of_rank(q.rank(q.unique_min()?));
    Some((p.total_alternating_sum() - ep) * (q.total_alternating_sum() - eq) - ep * eq)
}

pub fn reduced_product_checks(max_elements: usize) -> Vec<Check> {
    let family: Vec<RankedPoset> = [0, -1]
        .into_iter()
        .flat_map(|b| bounded_graded_posets(max_elements, b))
        .collect();
    let tag = format!("{} factors of at most {max_elements} elements", family.len());
    let (mismatched, unbalanced, balanced_pairs) = family
        .par_iter()
        .map(|p| {
            let mut stats = (0usize, 0usize, 0usize);
            for q in &family {
                let product = reduced_product(p, q).expect("bounded factors");
                let a = product.total_alternating_sum();
                if Some(a) != reduced_product_alternating_sum(p, q) {
                    stats.0 += 1;
                }
                if p.total_alternating_sum() == 0 && q.total_alternating_sum() == 0 {
                    stats.2 += 1;
                    if a != 0 {
                        stats.1 += 1;
                    }
                }
            }
            stats
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let pairs = family.len() * family.len();
    vec![
        Check::new(
            "reduced product closed form",
            tag.clone(),
            0,
            format!("{mismatched} of {pairs} pairs differ"),
            mismatched == 0,
        ),
        Check::new(
            "reduced product balance",
            tag,
            0,
            format!("{unbalanced} of {balanced_pairs} balanced pairs unbalanced"),
            unbalanced == 0,
        ),
    ]
}

/// Named audit profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Seconds-scale subset for quick runs.
    Smoke,
    /// `r <= 3, |n| <= 4`, `r <= 2, |n| <= 5`, `r = 1, n <= 8`.
    Desk,
}

impl Profile {
    /// Instances for counts and Eulerian checks.
    pub fn n_list(self) -> Vec<NVector> {
        match self {
            Profile::Smoke => (1..=2).flat_map(|r| point_vectors(r, 3)).collect(),
            Profile::Desk => {
                let mut v: Vec<NVector> = (1..=3).flat_map(|r| point_vectors(r, 4)).collect();
                v.extend(point_vectors(2, 5).into_iter().filter(|n| n.total() == 5));
                v.extend(point_vectors(1, 5).into_iter().filter(|n| n.total() == 5));
                v
            }
        }
    }

    /// Extra count-only instances.
    pub fn count_only(self) -> Vec<NVector> {
        match self {
            Profile::Smoke => vec![],
            Profile::Desk => (6..=8).map(|k| NVector::new(vec![k]).unwrap()).collect(),
        }
    }

    pub fn identities(self) -> IdentityConfig {
        match self {
            Profile::Smoke => IdentityConfig {
                n_list: self.n_list(),
                r_list: vec![1, 2],
                f_degree: 6,
                tree_degree: 4,
                fiber_max_r: 2,
                fiber_factors: 2,
                fiber_points: 2,
                product_elements: 4,
            },
            Profile::Desk => IdentityConfig {
                n_list: self.n_list(),
                r_list: vec![1, 2, 3],
                f_degree: 12,
                tree_degree: 6,
                fiber_max_r: 2,
                fiber_factors: 3,
                fiber_points: 3,
                product_elements: 6,
            },
        }
    }
}

/// Counts, Eulerian checks and identities for a profile, in that order.
pub fn run_profile(profile: Profile, oracles: &Oracles) -> AuditReport {
    let mut count_instances = profile.n_list();
    count_instances.extend(profile.count_only());
    let counts: Vec<AuditReport> = count_instances
        .iter()
        .map(|n| oracles.counts(n, n.total()))
        .collect();
    let eulerian: Vec<AuditReport> = profile.n_list().par_iter().map(audit_eulerian).collect();
    let identities = audit_identities(&profile.identities());
    AuditReport::merge(counts.into_iter().chain(eulerian).chain([identities]))
}

/// The three-oracle rows for `W_n` as plain data, for callers that render
/// their own tables.
pub fn count_table(n: &NVector, max_degree: u32, oracles: &Oracles) -> Result<Vec<CountRow>, String> {
    if max_degree < n.total() {
        return Err(format!(
            "--max-degree {max_degree} is below |n| = {}",
            n.total()
        ));
    }
    let w = enumerate_wn(n).map_err(|e| e.to_string())?;
    Ok(count_rows(&w, &oracles.counter, &oracles.solver(max_degree)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nv(s: &str) -> NVector {
        s.parse().unwrap()
    }

    #[test]
    fn counts_for_segment() {
        let report = audit_counts(&nv("1,1"), 2);
        assert!(report.passed(), "{}", report.to_table());
        let values: Vec<(String, String)> = report
            .checks
            .iter()
            .map(|c| (c.instance.clone(), c.expected.clone()))
            .collect();
        assert_eq!(
            values,
            vec![
                ("n=(1,1) T=(..) m=0".to_string(), "2".to_string()),
                ("n=(1,1) T=(..) m=1".to_string(), "1".to_string()),
            ]
        );
    }

    #[test]
    fn counts_for_single_line() {
        let report = audit_counts(&nv("4"), 4);
        assert!(report.passed());
        let expected: Vec<&str> = report.checks.iter().map(|c| c.expected.as_str()).collect();
        assert_eq!(expected, vec!["5", "5", "1"]);
        let report = audit_counts(&nv("3"), 3);
        let expected: Vec<&str> = report.checks.iter().map(|c| c.expected.as_str()).collect();
        assert_eq!(expected, vec!["2", "1"]);
    }

    #[test]
    fn low_truncation_is_a_failed_row() {
        let report = audit_counts(&nv("2,1"), 2);
        assert!(!report.passed());
        assert_eq!(report.checks[0].name, "truncation");
    }

    #[test]
    fn eulerian_small_cases() {
        for text in ["1,1", "2", "2,1"] {
            let report = audit_eulerian(&nv(text));
            assert!(report.passed(), "{}", report.to_table());
            assert_eq!(report.subset("sublevel").count(), 1);
            assert_eq!(report.subset("superlevel").count(), 1);
        }
    }

    #[test]
    fn fiber_product_of_two_segments() {
        let checks = fiber_product_checks(2, 2, 2);
        let target = checks
            .iter()
            .find(|c| c.instance == "r=2 (1,1) x (1,1)" && c.name == "fiber product A")
            .unwrap();
        assert!(target.pass);
        assert_eq!(target.observed, "1");
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn graded_family_sizes() {
        // chains of 1..=4 elements, plus the diamond
        let family = bounded_graded_posets(4, 0);
        assert_eq!(family.len(), 5);
        assert!(family.iter().all(|p| p.unique_min().is_some() && p.unique_max().is_some()));
        let family = bounded_graded_posets(6, 0);
        assert!(family.iter().all(|p| p.len() <= 6 && p.is_graded()));
    }

    #[test]
    fn reduced_product_rows_pass() {
        assert!(reduced_product_checks(5).iter().all(|c| c.pass));
    }

    #[test]
    fn smoke_profile_passes() {
        let report = run_profile(Profile::Smoke, &Oracles::new());
        assert!(report.passed(), "{}", report.to_table());
        assert!(report.summary.total > 50);
        let again = run_profile(Profile::Smoke, &Oracles::new());
        assert_eq!(report, again);
    }

    #[test]
    fn report_renderings() {
        let report = AuditReport::from_checks(vec![
            Check::equal("a", "x", 1, 1),
            Check::equal("b", "y", 1, 2).in_subset("sublevel"),
        ]);
        assert_eq!(report.summary, Summary { total: 2, passed: 1, failed: 1 });
        let table = report.to_table();
        assert!(table.contains("b [sublevel]"));
        assert!(table.contains("FAIL"));
        assert!(table.ends_with("2 checks, 1 passed, 1 failed\n"));
        let back: AuditReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
