use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;

use polyreg::forprog::{check_first_order, compile_formula_to_program, parse_program, run_boolean, run_enumerator, run_program};
use polyreg::logic::{eval, Assignment, Formula};
use polyreg::structures::ordered_model;
use proptest::prelude::*;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["u", "v", "z"]).prop_map(str::to_string)
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::False),
        (prop::sample::select(vec!['a', 'b']), var()).prop_map(|(c, v)| Formula::Label(c, v)),
        (var(), var()).prop_map(|(v, w)| Formula::Less(v, w)),
        (var(), var()).prop_map(|(v, w)| Formula::Equal(v, w)),
        (var(), var()).prop_map(|(v, w)| Formula::Succ(v, w)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2).prop_map(Formula::Or),
            (var(), inner.clone()).prop_map(|(v, f)| Formula::exists(&v, f)),
            (var(), inner).prop_map(|(v, f)| Formula::forall(&v, f)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Compiled programs decide their formula on every assignment.
    #[test]
    fn compiled_programs_match_evaluation(
        f in formula().prop_filter("rank at most 2", |f| f.quantifier_rank() <= 2),
        w in "[ab]{1,6}",
    ) {
        let inputs: Vec<String> = f.free_vars().into_iter().collect();
        let p = compile_formula_to_program(&f, &inputs).unwrap();
        prop_assert!(check_first_order(&p));
        let m = ordered_model(&w);
        let n = w.len();
        let total = n.pow(inputs.len() as u32);
        for code in 0..total {
            let mut rest = code;
            let mut args = Vec::new();
            let mut a = Assignment::new();
            for v in &inputs {
                let pos = rest % n + 1;
                rest /= n;
                args.push(pos);
                a = a.with(v, pos);
            }
            prop_assert_eq!(run_boolean(&p, &w, &args).unwrap(), eval(&f, &m, &a).unwrap(), "{} at {:?}", f, args);
        }
    }

    #[test]
    fn shipped_enumerators_never_repeat(w in "[ab]{1,7}") {
        for name in ["revprefix", "colex_pairs", "ab_pairs", "labels_first", "increasing_triples"] {
            let p = parse_program(&fs::read_to_string(corpus_dir().join(format!("{name}.enum.forp"))).unwrap()).unwrap();
            let tuples = run_enumerator(&p, &w).unwrap();
            let k = tuples.first().map_or(1, Vec::len);
            prop_assert_eq!(tuples.iter().collect::<HashSet<_>>().len(), tuples.len());
            prop_assert!(tuples.len() <= w.len().pow(k as u32));
        }
    }
}

/// A Boolean declared inside a loop starts false in every iteration.
#[test]
fn booleans_reset_on_each_iteration() {
    let p = parse_program(
        "for x up {
           bool P
           if a(x) { P := true }
           if P { output a } else { output b }
         }",
    )
    .unwrap();
    // without the reset the first a would make every later letter an a
    assert_eq!(run_program(&p, "abba").unwrap(), "abba");
    assert_eq!(run_program(&p, "bbab").unwrap(), "bbab");
}

/// A Boolean declared outside the loop keeps its value across iterations.
#[test]
fn outer_booleans_persist() {
    let p = parse_program(
        "bool P
         for x up {
           if a(x) { P := true }
           if P { output a } else { output b }
         }",
    )
    .unwrap();
    assert_eq!(run_program(&p, "baab").unwrap(), "baaa");
}

#[test]
fn nested_reset_inside_inner_loop() {
    // for each x, count parity of later positions; P is fresh for each x
    let p = parse_program(&fs::read_to_string(corpus_dir().join("even_distance.forp")).unwrap()).unwrap();
    assert!(!check_first_order(&p));
    for w in ["ab", "aba", "abba", "babab"] {
        let n = w.len();
        let expected: String = w.chars().enumerate().filter(|(i, _)| (n - 1 - i) % 2 == 0).map(|(_, c)| c).collect();
        assert_eq!(run_program(&p, w).unwrap(), expected, "{w}");
    }
}
