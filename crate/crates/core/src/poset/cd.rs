//! Flag f-vectors, flag h-vectors, ab-index and cd-index.

use super::{PosetError, RankedPoset};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Chain counts of a bounded graded poset, indexed by rank sets.
///
/// Ranks are measured from the minimum, so the rank set of a chain is a
/// subset of `{1, .., rank_span - 1}`. Subsets are stored as bitmasks with
/// bit `i - 1` standing for rank `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagVector {
    pub rank_span: usize,
    entries: BTreeMap<u32, BigInt>,
}

impl FlagVector {
    pub fn get(&self, ranks: &[usize]) -> BigInt {
        let mask = ranks.iter().fold(0u32, |m, &r| m | 1 << (r - 1));
        self.entries.get(&mask).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &BigInt)> {
        self.entries.iter().map(|(&mask, v)| (mask_to_ranks(mask), v))
    }

    /// Inclusion-exclusion `h(S) = sum_{T <= S} (-1)^{|S - T|} f(T)`.
    pub fn flag_h(&self) -> FlagVector {
        let mut entries = BTreeMap::new();
        for &s in self.entries.keys() {
            let mut acc = BigInt::zero();
            // iterate all submasks of s, including 0
            let mut t = s;
            loop {
                let sign = if (s & !t).count_ones() % 2 == 0 { 1 } else { -1 };
                acc += self.entries[&t].clone() * sign;
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            entries.insert(s, acc);
        }
        FlagVector {
            rank_span: self.rank_span,
            entries,
        }
    }

    /// `sum_S h(S) u_S` with `u_S` having `b` at the positions in `S`.
    pub fn ab_index(&self) -> AbPolynomial {
        let h = self.flag_h();
        let len = self.rank_span.saturating_sub(1);
        let mut terms = BTreeMap::new();
        for (&mask, coeff) in &h.entries {
            if coeff.is_zero() {
                continue;
            }
            let word: AbWord = (0..len).map(|i| mask >> i & 1 == 1).collect();
            terms.insert(word, coeff.clone());
        }
        AbPolynomial {
            degree: len,
            terms,
        }
    }
}

fn mask_to_ranks(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// A word in `a, b`; `true` stands for `b`.
pub type AbWord = Vec<bool>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbPolynomial {
    pub degree: usize,
    pub terms: BTreeMap<AbWord, BigInt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CdLetter {
    C,
    D,
}

impl CdLetter {
    pub fn weight(self) -> usize {
        match self {
            CdLetter::C => 1,
            CdLetter::D => 2,
        }
    }
}

/// Integer combination of words in the non-commuting letters `c`
/// (weight 1) and `d` (weight 2).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CdPolynomial {
    terms: BTreeMap<Vec<CdLetter>, BigInt>,
}

impl CdPolynomial {
    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<CdLetter>, BigInt)>) -> Self {
        let mut poly = Self::default();
        for (word, coeff) in terms {
            poly.add_term(word, coeff);
        }
        poly
    }

    /// Parses words such as `"cc"`, `"d"` or `""` with integer coefficients.
    pub fn from_words(terms: &[(&str, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|(w, c)| {
            let word = w
                .chars()
                .map(|ch| match ch {
                    'c' => CdLetter::C,
                    'd' => CdLetter::D,
                    other => panic!("not a cd letter: {other}"),
                })
                .collect();
            (word, BigInt::from(*c))
        }))
    }

    fn add_term(&mut self, word: Vec<CdLetter>, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<CdLetter>, BigInt> {
        &self.terms
    }

    pub fn coefficient(&self, word: &[CdLetter]) -> BigInt {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common weight of all words, or `None` for the zero polynomial or a
    /// non-homogeneous one.
    pub fn weight(&self) -> Option<usize> {
        let mut weights = self
            .terms
            .keys()
            .map(|w| w.iter().map(|l| l.weight()).sum::<usize>());
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }

    fn prepend(&self, letter: CdLetter) -> CdPolynomial {
        CdPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| {
                    let mut word = Vec::with_capacity(w.len() + 1);
                    word.push(letter);
                    word.extend_from_slice(w);
                    (word, c.clone())
                })
                .collect(),
        }
    }

    /// Expansion with `c = a + b` and `d = ab + ba`.
    pub fn to_ab(&self) -> AbPolynomial {
        let mut terms: BTreeMap<AbWord, BigInt> = BTreeMap::new();
        let mut degree = 0;
        for (word, coeff) in &self.terms {
            degree = word.iter().map(|l| l.weight()).sum();
            let mut expansions: Vec<AbWord> = vec![Vec::new()];
            for letter in word {
                let pieces: &[&[bool]] = match letter {
                    CdLetter::C => &[&[false], &[true]],
                    CdLetter::D => &[&[false, true], &[true, false]],
                };
                expansions = expansions
                    .iter()
                    .flat_map(|prefix| {
                        pieces.iter().map(move |p| {
                            let mut w = prefix.clone();
                            w.extend_from_slice(p);
                            w
                        })
                    })
                    .collect();
            }
            for w in expansions {
                *terms.entry(w).or_default() += coeff;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        AbPolynomial { degree, terms }
    }
}

impl fmt::Display for CdPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (word, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            let magnitude = coeff.abs();
            if word.is_empty() {
                write!(f, "{magnitude}")?;
                continue;
            }
            if !magnitude.is_one() {
                write!(f, "{magnitude}")?;
            }
            let mut idx = 0;
            while idx < word.len() {
                let letter = word[idx];
                let run = word[idx..].iter().take_while(|&&l| l == letter).count();
                let ch = match letter {
                    CdLetter::C => 'c',
                    CdLetter::D => 'd',
                };
                if run == 1 {
                    write!(f, "{ch}")?;
                } else {
                    write!(f, "{ch}^{run}")?;
                }
                idx += run;
            }
        }
        Ok(())
    }
}

pub(super) fn flag_f_vector(poset: &RankedPoset) -> Result<FlagVector, PosetError> {
    let (bottom, top) = match (poset.unique_min(), poset.unique_max()) {
        (Some(b), Some(t)) => (b, t),
        _ => return Err(PosetError::NotBounded("flag f-vector".into())),
    };
    if !poset.is_graded() {
        return Err(PosetError::NotGraded);
    }
    let base = poset.rank(bottom);
    let span = poset.rank(top) - base;
    if !(0..=30).contains(&span) {
        return Err(PosetError::RankSpanTooLarge(span));
    }
    let span = span as usize;
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); span + 1];
    for e in 0..poset.len() {
        levels[(poset.rank(e) - base) as usize].push(e);
    }

    let inner = span.saturating_sub(1) as u32;
    let mut entries = BTreeMap::new();
    for mask in 0u32..(1u32 << inner) {
        let ranks = mask_to_ranks(mask);
        let mut weights: Vec<(usize, BigInt)> = vec![(bottom, BigInt::one())];
        for &r in ranks.iter().chain(std::iter::once(&span)) {
            let next: Vec<(usize, BigInt)> = levels[r]
                .iter()
                .map(|&y| {
                    let total: BigInt = weights
                        .iter()
                        .filter(|(x, _)| poset.le(*x, y))
                        .map(|(_, w)| w.clone())
                        .sum();
                    (y, total)
                })
                .collect();
            weights = next;
        }
        let count: BigInt = weights.into_iter().map(|(_, w)| w).sum();
        entries.insert(mask, count);
    }
    Ok(FlagVector {
        rank_span: span,
        entries,
    })
}

pub(super) fn cd_index(poset: &RankedPoset) -> Result<CdPolynomial, PosetError> {
    let flag = flag_f_vector(poset)?;
    let ab = flag.ab_index();
    ab_to_cd(&ab.terms, ab.degree)
        .ok_or_else(|| PosetError::NotEulerian(format!("ab-index of degree {}", ab.degree)))
}

type AbTerms = BTreeMap<AbWord, BigInt>;

fn split_first(terms: &AbTerms, letter: bool) -> AbTerms {
    terms
        .iter()
        .filter(|(w, _)| w.first() == Some(&letter))
        .map(|(w, c)| (w[1..].to_vec(), c.clone()))
        .collect()
}

fn combine(lhs: &AbTerms, rhs: &AbTerms, sign: i32) -> AbTerms {
    let mut out = lhs.clone();
    for (w, c) in rhs {
        let entry = out.entry(w.clone()).or_default();
        if sign >= 0 {
            *entry += c;
        } else {
            *entry -= c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn prefixed(terms: &AbTerms, letter: bool) -> AbTerms {
    terms
        .iter()
        .map(|(w, c)| {
            let mut word = vec![letter];
            word.extend_from_slice(w);
            (word, c.clone())
        })
        .collect()
}

/// Writes a homogeneous ab-polynomial as `c U + d V`, recursively.
///
/// From `Psi = a Psi_a + b Psi_b` and `Psi = cU + dV` one gets
/// `Psi_a - Psi_b = bV - aV` and `U = Psi_a - bV`. Returns `None` when the
/// remainder is nonzero at any level.
fn ab_to_cd(terms: &AbTerms, degree: usize) -> Option<CdPolynomial> {
    let mut terms = terms.clone();
    terms.retain(|_, c| !c.is_zero());
    if terms.is_empty() {
        return Some(CdPolynomial::default());
    }
    if degree == 0 {
        return Some(CdPolynomial::from_terms([(
            Vec::new(),
            terms.get(&Vec::new()).cloned()?,
        )]));
    }
    let psi_a = split_first(&terms, false);
    let psi_b = split_first(&terms, true);
    let diff = combine(&psi_a, &psi_b, -1);
    let v = if degree == 1 {
        if !diff.is_empty() {
            return None;
        }
        AbTerms::new()
    } else {
        let v = split_first(&diff, true);
        let minus_v = split_first(&diff, false);
        if !combine(&v, &minus_v, 1).is_empty() {
            return None;
        }
        v
    };
    let u = combine(&psi_a, &prefixed(&v, true), -1);
    let u_cd = ab_to_cd(&u, degree - 1)?;
    let mut out = u_cd.prepend(CdLetter::C);
    if degree >= 2 {
        let v_cd = ab_to_cd(&v, degree - 2)?;
        for (w, c) in v_cd.prepend(CdLetter::D).terms {
            out.add_term(w, c);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounded(ranks: Vec<i64>, covers: Vec<(usize, usize)>) -> RankedPoset {
        let labels = (0..ranks.len()).map(|i| i.to_string()).collect();
        RankedPoset::from_covers(ranks, labels, covers).unwrap()
    }

    fn completed_polygon(k: usize) -> RankedPoset {
        // 0: bottom, 1..=k vertices, k+1..=2k edges, 2k+1 top
        let mut ranks = vec![-1];
        ranks.extend(std::iter::repeat(0).take(k));
        ranks.extend(std::iter::repeat(1).take(k));
        ranks.push(2);
        let mut covers = Vec::new();
        for i in 0..k {
            covers.push((0, 1 + i));
            covers.push((1 + i, 1 + k + i));
            covers.push((1 + (i + 1) % k, 1 + k + i));
            covers.push((1 + k + i, 2 * k + 1));
        }
        bounded(ranks, covers)
    }

    #[test]
    fn two_chain_gives_empty_word() {
        let p = bounded(vec![-1, 0], vec![(0, 1)]);
        assert_eq!(p.cd_index().unwrap(), CdPolynomial::from_words(&[("", 1)]));
    }

    #[test]
    fn segment_gives_c() {
        let p = bounded(vec![-1, 0, 0, 1], vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(p.cd_index().unwrap(), CdPolynomial::from_words(&[("c", 1)]));
    }

    #[test]
    fn pentagon_flag_vectors_by_brute_force() {
        let p = completed_polygon(5);
        let f = p.flag_f_vector().unwrap();
        assert_eq!(f.rank_span, 3);
        // brute force: count chains bottom < x < y < top by rank pattern
        let mut counts = BTreeMap::new();
        for x in 0..p.len() {
            for y in 0..p.len() {
                if p.rank(x) == 0 && p.rank(y) == 1 && p.le(x, y) {
                    *counts.entry("12").or_insert(0) += 1;
                }
            }
        }
        assert_eq!(counts["12"], 10);
        assert_eq!(f.get(&[]), BigInt::from(1));
        assert_eq!(f.get(&[1]), BigInt::from(5));
        assert_eq!(f.get(&[2]), BigInt::from(5));
        assert_eq!(f.get(&[1, 2]), BigInt::from(10));
        let h = f.flag_h();
        assert_eq!(h.get(&[1, 2]), BigInt::from(1));
        assert_eq!(h.get(&[1]), BigInt::from(4));
    }

    #[test]
    fn pentagon_cd_index() {
        let cd = completed_polygon(5).cd_index().unwrap();
        assert_eq!(cd, CdPolynomial::from_words(&[("cc", 1), ("d", 3)]));
        assert_eq!(cd.to_string(), "c^2 + 3d");
        assert_eq!(cd.weight(), Some(2));
    }

    #[test]
    fn polygon_family_has_d_coefficient_k_minus_2() {
        for k in 2..8 {
            let cd = completed_polygon(k).cd_index().unwrap();
            assert_eq!(
                cd,
                CdPolynomial::from_words(&[("cc", 1), ("d", k as i64 - 2)])
            );
        }
    }

    #[test]
    fn non_eulerian_rank_two_poset_has_remainder() {
        // three atoms under one top
        let p = bounded(
            vec![-1, 0, 0, 0, 1],
            vec![(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)],
        );
        assert!(matches!(p.cd_index(), Err(PosetError::NotEulerian(_))));
    }

    #[test]
    fn unbounded_is_rejected() {
        let p = bounded(vec![0, 0], vec![]);
        assert!(matches!(p.cd_index(), Err(PosetError::NotBounded(_))));
    }

    #[test]
    fn cd_round_trips_through_ab() {
        let cd = CdPolynomial::from_words(&[("ccc", 1), ("cd", 4), ("dc", -2)]);
        let ab = cd.to_ab();
        assert_eq!(ab.degree, 3);
        assert_eq!(ab_to_cd(&ab.terms, 3).unwrap(), cd);
    }

    #[test]
    fn ab_without_cd_form_is_detected() {
        let mut terms = AbTerms::new();
        terms.insert(vec![false, true], BigInt::from(1));
        assert!(ab_to_cd(&terms, 2).is_none());
    }
}
