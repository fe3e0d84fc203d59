use std::fs;
use std::path::PathBuf;

use polyreg::interpretation::{evaluate_interpretation, Interpretation};
use polyreg::logic::{eval, parse_formula, Assignment, Formula, NameSupply, RelationMap, Substitution, Template};
use polyreg::logic::substitute_with;
use polyreg::structures::ordered_model;
use proptest::prelude::*;

const VARS: [&str; 3] = ["u", "v", "z"];

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(VARS.to_vec()).prop_map(str::to_string)
}

/// Random FO formulas over labels, `<`, `=` and, optionally, successor.
fn formula(with_succ: bool) -> impl Strategy<Value = Formula> {
    let letter = prop::sample::select(vec!['a', 'b']);
    let mut atoms = vec![
        Just(Formula::True).boxed(),
        (letter, var()).prop_map(|(c, v)| Formula::Label(c, v)).boxed(),
        (var(), var()).prop_map(|(v, w)| Formula::Less(v, w)).boxed(),
        (var(), var()).prop_map(|(v, w)| Formula::Equal(v, w)).boxed(),
    ];
    if with_succ {
        atoms.push((var(), var()).prop_map(|(v, w)| Formula::Succ(v, w)).boxed());
    }
    prop::strategy::Union::new(atoms).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2).prop_map(Formula::Or),
            (var(), inner.clone()).prop_map(|(v, f)| Formula::exists(&v, f)),
            (var(), inner).prop_map(|(v, f)| Formula::forall(&v, f)),
        ]
    })
}

fn word() -> impl Strategy<Value = String> {
    "[ab]{1,5}"
}

fn assignment(len: usize, pos: &[usize; 3]) -> Assignment {
    VARS.iter().zip(pos).fold(Assignment::new(), |a, (v, &p)| a.with(v, (p % len) + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn double_negation(f in formula(true), w in word(), pos in any::<[usize; 3]>()) {
        let m = ordered_model(&w);
        let a = assignment(w.len(), &pos);
        let nn = Formula::not(Formula::not(f.clone()));
        prop_assert_eq!(eval(&nn, &m, &a).unwrap(), eval(&f, &m, &a).unwrap());
    }

    #[test]
    fn de_morgan(f in formula(true), g in formula(true), w in word(), pos in any::<[usize; 3]>()) {
        let m = ordered_model(&w);
        let a = assignment(w.len(), &pos);
        let lhs = Formula::not(Formula::And(vec![f.clone(), g.clone()]));
        let rhs = Formula::Or(vec![Formula::not(f.clone()), Formula::not(g.clone())]);
        prop_assert_eq!(eval(&lhs, &m, &a).unwrap(), eval(&rhs, &m, &a).unwrap());
        let lhs = Formula::not(Formula::Or(vec![f.clone(), g.clone()]));
        let rhs = Formula::And(vec![Formula::not(f), Formula::not(g)]);
        prop_assert_eq!(eval(&lhs, &m, &a).unwrap(), eval(&rhs, &m, &a).unwrap());
    }

    #[test]
    fn renaming_bound_variables_is_invisible(f in formula(true), w in word(), pos in any::<[usize; 3]>()) {
        let m = ordered_model(&w);
        let a = assignment(w.len(), &pos);
        let g = f.freshen_bound(&mut NameSupply::new(f.all_names()));
        prop_assert_eq!(g.free_vars(), f.free_vars());
        prop_assert_eq!(g.quantifier_rank(), f.quantifier_rank());
        prop_assert_eq!(eval(&g, &m, &a).unwrap(), eval(&f, &m, &a).unwrap());
    }

    #[test]
    fn printing_round_trips(f in formula(true)) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }
}

fn corpus(name: &str) -> Interpretation {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus").join(name);
    Interpretation::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Templates defining the output word of `i` over its input word.
fn templates(i: &Interpretation) -> RelationMap {
    let xs = polyreg::logic::indexed_vars("x", i.k);
    let ys = polyreg::logic::indexed_vars("y", i.k);
    let mut map = RelationMap::new();
    for (c, phi) in &i.labels {
        map.insert(c.to_string(), Template::unary(phi.clone()));
    }
    let strict = Formula::And(vec![i.order_formula().clone(), Formula::not(Formula::tuple_equal(&xs, &ys))]);
    map.insert("<".into(), Template::binary(strict));
    map
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Evaluating the substituted formula on the input word agrees with
    /// evaluating the original formula on the output word.
    #[test]
    fn substitution_is_sound(
        f in formula(false).prop_filter("rank at most 2", |f| f.quantifier_rank() <= 2),
        which in 0usize..3,
        w in "[ab]{2,5}",
        pos in any::<[usize; 3]>(),
    ) {
        let i = corpus(["reverse.json", "revprefix.json", "squaring.json"][which]);
        let e = evaluate_interpretation(&i, &w).unwrap();
        let name = |v: &str, j: usize| format!("{v}_{j}");
        let opts = Substitution { k: i.k, universe: Some(&i.universe), free_name: &name };
        let g = substitute_with(&f, &templates(&i), &opts).unwrap();
        let n = e.tuples.len();
        let out = ordered_model(&e.output);
        let input = ordered_model(&w);
        let mut a_out = Assignment::new();
        let mut a_in = Assignment::new();
        for (v, &p) in VARS.iter().zip(&pos) {
            let p = p % n;
            a_out = a_out.with(v, p + 1);
            for (j, &x) in e.tuples[p].iter().enumerate() {
                a_in = a_in.with(&name(v, j + 1), x);
            }
        }
        prop_assert_eq!(eval(&g, &input, &a_in).unwrap(), eval(&f, &out, &a_out).unwrap(), "{} became {}", f, g);
    }
}
