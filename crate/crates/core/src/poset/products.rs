//! Reduced products and fiber products of ranked posets.

use super::{covers_from_order, ElemId, PosetError, RankedPoset};
use fixedbitset::FixedBitSet;

fn bounds(p: &RankedPoset, what: &str) -> Result<(ElemId, ElemId), PosetError> {
    match (p.unique_min(), p.unique_max()) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err(PosetError::NotBounded(what.to_string())),
    }
}

/// `((P_min, P_max] x (Q_min, Q_max]) ∪ {(P_min, Q_min)}` with the product
/// order and summed ranks; the merged minimum gets rank
/// `d(P_min) + d(Q_min) + 1`.
///
/// Element 0 is the merged minimum (label `"min"`); pairs follow in
/// lexicographic id order and are labelled `"(p,q)"`.
pub fn reduced_product(p: &RankedPoset, q: &RankedPoset) -> Result<RankedPoset, PosetError> {
    let (p_min, _) = bounds(p, "left factor")?;
    let (q_min, _) = bounds(q, "right factor")?;
    let p_rest: Vec<ElemId> = (0..p.len()).filter(|&e| e != p_min).collect();
    let q_rest: Vec<ElemId> = (0..q.len()).filter(|&e| e != q_min).collect();

    let mut ranks = vec![p.rank(p_min) + q.rank(q_min) + 1];
    let mut labels = vec!["min".to_string()];
    let mut index = vec![vec![usize::MAX; q.len()]; p.len()];
    for &a in &p_rest {
        for &b in &q_rest {
            index[a][b] = ranks.len();
            ranks.push(p.rank(a) + q.rank(b));
            labels.push(format!("({},{})", p.label(a), q.label(b)));
        }
    }
    let mut covers = Vec::new();
    for &a in &p_rest {
        for &b in &q_rest {
            let here = index[a][b];
            if p.lower_covers(a).contains(&p_min) && q.lower_covers(b).contains(&q_min) {
                covers.push((0, here));
            }
            for &a2 in p.upper_covers(a) {
                covers.push((here, index[a2][b]));
            }
            for &b2 in q.upper_covers(b) {
                covers.push((here, index[a][b2]));
            }
        }
    }
    RankedPoset::from_covers(ranks, labels, covers)
}

/// Left-associated iteration of [`reduced_product`].
pub fn reduced_product_all(factors: &[&RankedPoset]) -> Result<RankedPoset, PosetError> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| PosetError::NotBounded("empty reduced product".into()))?;
    bounds(first, "factor 0")?;
    let mut acc = (*first).clone();
    for f in rest {
        acc = reduced_product(&acc, f)?;
    }
    Ok(acc)
}

/// One factor of a fiber product: a poset and its map into the base.
#[derive(Clone, Copy)]
pub struct FiberFactor<'a> {
    pub poset: &'a RankedPoset,
    pub map: &'a [ElemId],
}

/// Tuples `(F_1, .., F_k)` with a common image `b` in the base, ordered
/// componentwise, with rank `sum d(F_i) - (k - 1) d(b)`.
///
/// Labels are `"(l_1,..,l_k)"` and elements are numbered in lexicographic
/// order of the tuples.
pub fn fiber_product(
    factors: &[FiberFactor<'_>],
    base: &RankedPoset,
) -> Result<RankedPoset, PosetError> {
    if factors.is_empty() {
        return Err(PosetError::BadFactor {
            factor: 0,
            reason: "no factors".into(),
        });
    }
    for (i, f) in factors.iter().enumerate() {
        if f.map.len() != f.poset.len() {
            return Err(PosetError::BadFactor {
                factor: i,
                reason: format!("map has {} entries for {} elements", f.map.len(), f.poset.len()),
            });
        }
        if let Some(&b) = f.map.iter().find(|&&b| b >= base.len()) {
            return Err(PosetError::BadFactor {
                factor: i,
                reason: format!("image {b} outside the base"),
            });
        }
        for &(lo, hi) in f.poset.covers() {
            if !base.le(f.map[lo], f.map[hi]) {
                return Err(PosetError::BadFactor {
                    factor: i,
                    reason: format!("map is not order-preserving on cover {lo} -> {hi}"),
                });
            }
        }
    }

    let k = factors.len() as i64;
    let mut tuples: Vec<Vec<ElemId>> = Vec::new();
    let mut images = Vec::new();
    for b in 0..base.len() {
        let fibers: Vec<Vec<ElemId>> = factors
            .iter()
            .map(|f| (0..f.poset.len()).filter(|&e| f.map[e] == b).collect())
            .collect();
        let mut partial: Vec<Vec<ElemId>> = vec![Vec::new()];
        for fiber in &fibers {
            partial = partial
                .into_iter()
                .flat_map(|t| {
                    fiber.iter().map(move |&e| {
                        let mut t = t.clone();
                        t.push(e);
                        t
                    })
                })
                .collect();
        }
        for t in partial {
            tuples.push(t);
            images.push(b);
        }
    }
    let mut order: Vec<usize> = (0..tuples.len()).collect();
    order.sort_by(|&a, &b| tuples[a].cmp(&tuples[b]));
    let tuples: Vec<Vec<ElemId>> = order.iter().map(|&i| tuples[i].clone()).collect();
    let images: Vec<ElemId> = order.iter().map(|&i| images[i]).collect();
    let n = tuples.len();

    let ranks: Vec<i64> = tuples
        .iter()
        .zip(&images)
        .map(|(t, &b)| {
            t.iter()
                .zip(factors)
                .map(|(&e, f)| f.poset.rank(e))
                .sum::<i64>()
                - (k - 1) * base.rank(b)
        })
        .collect();
    let labels: Vec<String> = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t
                .iter()
                .zip(factors)
                .map(|(&e, f)| f.poset.label(e))
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();

    // above[i][e]: tuples whose i-th entry lies above e
    let above: Vec<Vec<FixedBitSet>> = factors
        .iter()
        .enumerate()
        .map(|(i, f)| {
            (0..f.poset.len())
                .map(|e| {
                    let mut set = FixedBitSet::with_capacity(n);
                    for (t, tuple) in tuples.iter().enumerate() {
                        if f.poset.le(e, tuple[i]) {
                            set.insert(t);
                        }
                    }
                    set
                })
                .collect()
        })
        .collect();
    let up: Vec<FixedBitSet> = tuples
        .iter()
        .map(|tuple| {
            let mut set = above[0][tuple[0]].clone();
            for (i, &e) in tuple.iter().enumerate().skip(1) {
                set.intersect_with(&above[i][e]);
            }
            set
        })
        .collect();

    let mut ascending: Vec<ElemId> = (0..n).collect();
    ascending.sort_by_key(|&e| (ranks[e], e));
    let covers = covers_from_order(&up, &ascending);
    RankedPoset::from_covers(ranks, labels, covers)
}
