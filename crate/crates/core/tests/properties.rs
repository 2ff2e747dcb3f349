use proptest::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use twoassoc::associahedron::{enumerate_trees, Tree};
use twoassoc::series::LaurentPoly;
use twoassoc::two_assoc::{enumerate_wn, NVector, TwoBracketing, WPoset};

// one enumeration per point vector, shared across cases
fn wn(n: &NVector) -> Arc<WPoset> {
    static SEEN: OnceLock<Mutex<HashMap<Vec<u32>, Arc<WPoset>>>> = OnceLock::new();
    let mut seen = SEEN.get_or_init(Default::default).lock().unwrap();
    seen.entry(n.entries().to_vec())
        .or_insert_with(|| Arc::new(enumerate_wn(n).unwrap()))
        .clone()
}

fn laurent() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-4i64..5, -6i64..7), 0..5).prop_map(LaurentPoly::from_terms)
}

proptest! {
    #[test]
    fn laurent_ring_laws(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.sub(&a), LaurentPoly::zero());
        prop_assert_eq!(
            a.mul(&b).eval_minus_one(),
            a.eval_minus_one() * b.eval_minus_one()
        );
    }

    #[test]
    fn tree_text_round_trips(r in 1usize..6, pick in any::<prop::sample::Index>()) {
        let trees = enumerate_trees(r).unwrap();
        let t = &trees[pick.index(trees.len())];
        let back: Tree = t.to_string().parse().unwrap();
        prop_assert_eq!(&back, t);
        prop_assert_eq!(t.to_bracketing().to_tree(), t.clone());
    }

    #[test]
    fn n_vector_text_round_trips(v in prop::collection::vec(0u32..5, 1..4)) {
        match NVector::new(v.clone()) {
            Ok(n) => prop_assert_eq!(n.to_string().parse::<NVector>().unwrap(), n),
            Err(_) => prop_assert!(v.iter().all(|&x| x == 0)),
        }
    }

    #[test]
    fn faces_round_trip_through_json(
        v in prop::collection::vec(0u32..3, 1..4),
        pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(v.iter().any(|&x| x > 0) && v.iter().sum::<u32>() <= 4);
        let n = NVector::new(v).unwrap();
        let w = wn(&n);
        let face = &w.elements[pick.index(w.elements.len())];
        prop_assert_eq!(&TwoBracketing::from_json(&face.to_json()).unwrap(), face);
    }
}
