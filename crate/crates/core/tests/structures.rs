use std::collections::BTreeMap;

use polyreg::structures::{ef_equivalent, ef_game, ordered_model, rank_type_id, threshold_signature, LinearOrder};
use proptest::prelude::*;

fn words(max: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer = vec![String::new()];
    for _ in 0..max {
        layer = layer.iter().flat_map(|w| ['a', 'b'].map(|c| format!("{w}{c}"))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// A word with a tuple of positions in it.
fn instance(arity: usize) -> impl Strategy<Value = (String, Vec<usize>)> {
    "[ab]{1,5}".prop_flat_map(move |w| {
        let n = w.len();
        (Just(w), prop::collection::vec(1..=n, arity))
    })
}

fn equiv(a: &(String, Vec<usize>), b: &(String, Vec<usize>), rank: usize) -> bool {
    ef_equivalent(&ordered_model(&a.0), &a.1, &ordered_model(&b.0), &b.1, rank).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn ef_is_reflexive_and_symmetric(a in instance(1), b in instance(1), rank in 0usize..3) {
        prop_assert!(equiv(&a, &a, rank));
        prop_assert_eq!(equiv(&a, &b, rank), equiv(&b, &a, rank));
    }

    #[test]
    fn ef_is_transitive(a in instance(1), b in instance(1), c in instance(1), rank in 0usize..3) {
        if equiv(&a, &b, rank) && equiv(&b, &c, rank) {
            prop_assert!(equiv(&a, &c, rank));
        }
    }

    #[test]
    fn higher_rank_refines_lower(a in instance(2), b in instance(2), rank in 0usize..3) {
        if equiv(&a, &b, rank + 1) {
            prop_assert!(equiv(&a, &b, rank));
        }
    }

    /// The interned types and the direct game solver decide the same relation.
    #[test]
    fn interned_types_match_the_game(a in instance(1), b in instance(1), rank in 0usize..3) {
        let (ma, mb) = (ordered_model(&a.0), ordered_model(&b.0));
        prop_assert_eq!(ef_game(&ma, &a.1, &mb, &b.1, rank), equiv(&a, &b, rank));
    }

    #[test]
    fn threshold_matches_ef_on_linear_orders(n in 1usize..10, m in 1usize..10, x in 1usize..10, y in 1usize..10, rank in 0usize..3) {
        let (x, y) = (x.min(n), y.min(m));
        let same = threshold_signature(n, &[x], rank) == threshold_signature(m, &[y], rank);
        prop_assert_eq!(same, ef_equivalent(&LinearOrder(n), &[x], &LinearOrder(m), &[y], rank).unwrap());
    }
}

/// Concatenation respects rank-r equivalence of sentences: `u ≡ u'` and
/// `v ≡ v'` give `uv ≡ u'v'`.
#[test]
fn concatenation_is_determined_by_types() {
    for rank in 0..=2 {
        let mut classes: BTreeMap<_, Vec<String>> = BTreeMap::new();
        for w in words(6) {
            classes.entry(rank_type_id(&ordered_model(&w), &[], rank).unwrap()).or_default().push(w);
        }
        let reps: Vec<Vec<String>> = classes.into_values().map(|ws| ws.into_iter().take(3).collect()).collect();
        for us in &reps {
            for vs in &reps {
                let base = ordered_model(&format!("{}{}", us[0], vs[0]));
                for u in us {
                    for v in vs {
                        let uv = ordered_model(&format!("{u}{v}"));
                        assert!(ef_equivalent(&base, &[], &uv, &[], rank).unwrap(), "{u}{v} vs {}{} at rank {rank}", us[0], vs[0]);
                    }
                }
            }
        }
    }
}
