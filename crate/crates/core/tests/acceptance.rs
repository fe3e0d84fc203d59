//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use polyreg::domination::{matching_lex_orders, product_type_classes, rational_dominating_coordinate, rational_order_table, FormulaOrder};
use polyreg::forprog::{check_first_order, compile_formula_to_program, parse_program, run_boolean, run_enumerator, run_program};
use polyreg::interpretation::{compose_fo, evaluate_interpretation, Interpretation};
use polyreg::logic::{eval, indexed_vars, parse_formula, Assignment, CompiledFormula, Logic};
use polyreg::pipeline::{compile_enumeration, enumerate_definable, DefinableEnumerator, PipelineOptions};
use polyreg::semigroup::{build_forest, height_bound, is_aperiodic, validate_forest, Homomorphism};
use polyreg::structures::{
    ef_equivalent, ordered_model, rank_type_id, threshold_signature, LinearOrder, ProductStructure, TypeId,
};

const GOLDEN_EXAMPLE_1: &str = "ababbabbba";
const GOLDEN_SECTION_4: &str = "[[1,1],[2,2],[2,1],[3,3],[3,2],[3,1],[4,4],[4,3],[4,2],[4,1]]";
const LIMIT_GOLDEN: Duration = Duration::from_secs(1);
const LIMIT_THEOREM_5: Duration = Duration::from_secs(120);
const LIMIT_FORESTS: Duration = Duration::from_secs(60);
const LIMIT_PIPELINE: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn words(alphabet: &[char], min: usize, max: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer = vec![String::new()];
    for len in 0..=max {
        if len >= min {
            out.extend(layer.iter().cloned());
        }
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}"))).collect();
    }
    out
}

fn timed(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Interpretation fixtures of the corpus that have a paired program, by stem.
fn paired_interpretations() -> BTreeMap<String, (Interpretation, PathBuf)> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(fixtures().join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if let Some(stem) = name.strip_suffix(".json").filter(|s| !s.ends_with(".enum")) {
            let forp = path.with_extension("forp");
            assert!(forp.exists(), "{name} has no paired program");
            out.insert(stem.to_string(), (Interpretation::from_json(&read(&path)).unwrap(), forp));
        }
    }
    out
}

fn fo_enumerators() -> BTreeMap<String, DefinableEnumerator> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(fixtures().join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if let Some(stem) = name.strip_suffix(".enum.json") {
            let e = DefinableEnumerator::from_json(&read(&path)).unwrap();
            if e.logic == Logic::Fo {
                out.insert(stem.to_string(), e);
            }
        }
    }
    for (stem, (i, _)) in paired_interpretations() {
        if i.flavor == Logic::Fo && !i.is_successor() {
            out.insert(format!("{stem} (interpretation)"), DefinableEnumerator::from_interpretation(&i).unwrap());
        }
    }
    out
}

fn golden_example_1() -> Outcome {
    let start = Instant::now();
    let dir = fixtures().join("corpus");
    let i = Interpretation::from_json(&read(&dir.join("revprefix.json"))).map_err(|e| e.to_string())?;
    let p = parse_program(&read(&dir.join("revprefix.forp"))).map_err(|e| e.to_string())?;
    let by_formula = evaluate_interpretation(&i, "abbb").map_err(|e| e.to_string())?.output;
    let by_program = run_program(&p, "abbb").map_err(|e| e.to_string())?;
    check(by_formula == GOLDEN_EXAMPLE_1, || format!("interpretation gave {by_formula}"))?;
    check(by_program == GOLDEN_EXAMPLE_1, || format!("program gave {by_program}"))?;
    timed(LIMIT_GOLDEN, start, format!("interpretation and program give {GOLDEN_EXAMPLE_1} on abbb"))
}

fn golden_section_4() -> Outcome {
    let start = Instant::now();
    let dir = fixtures().join("corpus");
    let e = DefinableEnumerator::from_json(&read(&dir.join("revprefix.enum.json"))).map_err(|e| e.to_string())?;
    let p = parse_program(&read(&dir.join("revprefix.enum.forp"))).map_err(|e| e.to_string())?;
    let oracle = enumerate_definable(&e, "abbb").map_err(|e| e.to_string())?;
    let program = run_enumerator(&p, "abbb").map_err(|e| e.to_string())?;
    let run = compile_enumeration(&e, "abbb", &PipelineOptions::default()).map_err(|e| e.to_string())?;
    for (who, list) in [("oracle", &oracle), ("program", &program), ("pipeline", &run.tuples)] {
        let json = serde_json::to_string(list).unwrap();
        check(json == GOLDEN_SECTION_4, || format!("{who} gave {json}"))?;
    }
    check(!run.fallback_used, || "pipeline used the fallback sort".into())?;
    timed(LIMIT_GOLDEN, start, "oracle, program and pipeline give the 10-tuple list".into())
}

fn theorem_5() -> Outcome {
    let start = Instant::now();
    let pairs = paired_interpretations();
    for required in ["identity", "reverse", "squaring", "revprefix"] {
        check(pairs.contains_key(required), || format!("missing pair {required}"))?;
    }
    check(pairs.len() >= 5, || format!("only {} pairs", pairs.len()))?;
    let mut tested = 0;
    for (stem, (i, forp)) in &pairs {
        let p = parse_program(&read(forp)).map_err(|e| format!("{stem}: {e}"))?;
        for w in words(&i.input_alphabet, 2, 6) {
            let a = evaluate_interpretation(i, &w).map_err(|e| format!("{stem} on {w}: {e}"))?.output;
            let b = run_program(&p, &w).map_err(|e| format!("{stem} on {w}: {e}"))?;
            check(a == b, || format!("{stem} on {w}: interpretation {a}, program {b}"))?;
            tested += 1;
        }
    }
    timed(LIMIT_THEOREM_5, start, format!("{} pairs agree on {tested} (pair, word) cases", pairs.len()))
}

fn composition() -> Outcome {
    let pairs = paired_interpretations();
    let fo: Vec<(&String, &Interpretation)> =
        pairs.iter().filter(|(_, (i, _))| i.flavor == Logic::Fo && !i.is_successor()).map(|(s, (i, _))| (s, i)).collect();
    let mut tested = 0;
    let mut compositions = 0;
    for &(fname, f) in &fo {
        for &(gname, g) in &fo {
            let h = compose_fo(f, g).map_err(|e| format!("{fname};{gname}: {e}"))?;
            compositions += 1;
            for w in words(&f.input_alphabet, 2, 5) {
                let mid = evaluate_interpretation(f, &w).map_err(|e| e.to_string())?.output;
                if mid.chars().count() < 2 {
                    continue;
                }
                let want = evaluate_interpretation(g, &mid).map_err(|e| e.to_string())?.output;
                let got = evaluate_interpretation(&h, &w).map_err(|e| format!("{fname};{gname} on {w}: {e}"))?.output;
                check(got == want, || format!("{fname};{gname} on {w}: composed {got}, staged {want}"))?;
                tested += 1;
            }
        }
    }
    let deep = compose_fo(&pairs["revprefix"].0, &pairs["revprefix"].0).map_err(|e| e.to_string())?;
    check(deep.k == 4, || format!("Example 1 composed with itself has dimension {}", deep.k))?;
    Ok(format!("{compositions} compositions agree with staged evaluation on {tested} words"))
}

const LEMMA_4_FORMULAS: [&str; 12] = [
    "(a x)",
    "(exists y (and (< x y) (b y)))",
    "(forall y (implies (< y x) (a y)))",
    "(succ x y)",
    "(exists z (and (< x z) (< z y) (a z)))",
    "(forall z (implies (and (< x z) (< z y)) (b z)))",
    "(and (< x y) (not (exists z (and (< z x) (b z)))))",
    "(exists z (and (succ x z) (forall y (implies (< z y) (b y)))))",
    "(or (= x y) (forall x (exists y (and (<= x y) (a y)))))",
    "(exists z (forall u (implies (< u z) (not (= u x)))))",
    "(iff (a x) (b y))",
    "(forall z (or (a z) (exists u (and (succ u z) (b u)))))",
];

fn lemma_4() -> Outcome {
    let inputs = vec!["x".to_string(), "y".to_string()];
    let mut checks = 0;
    for src in LEMMA_4_FORMULAS {
        let f = parse_formula(src).map_err(|e| e.to_string())?;
        check(f.quantifier_rank() <= 2, || format!("{src} has rank {}", f.quantifier_rank()))?;
        let p = compile_formula_to_program(&f, &inputs).map_err(|e| format!("{src}: {e}"))?;
        check(check_first_order(&p), || format!("{src} compiles to a program with a non-FO update"))?;
        for w in words(&['a', 'b'], 0, 6) {
            let m = ordered_model(&w);
            for x in 1..=w.len() {
                for y in 1..=w.len() {
                    let want = eval(&f, &m, &Assignment::new().with("x", x).with("y", y)).map_err(|e| e.to_string())?;
                    let got = run_boolean(&p, &w, &[x, y]).map_err(|e| e.to_string())?;
                    check(got == want, || format!("{src} on {w} at x={x} y={y}: program {got}, formula {want}"))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{} formulas, {checks} assignments, all compiled programs first-order", LEMMA_4_FORMULAS.len()))
}

fn forests() -> Outcome {
    let start = Instant::now();
    let mut built = 0;
    let mut names = Vec::new();
    for name in ["trivial", "seen_b", "last_letter"] {
        let h = Homomorphism::from_json(&read(&fixtures().join(format!("semigroups/{name}.json")))).map_err(|e| e.to_string())?;
        check(is_aperiodic(h.semigroup()), || format!("{name} is not aperiodic"))?;
        let bound = height_bound(&h).map_err(|e| e.to_string())?;
        for w in words(&['a', 'b'], 1, 8) {
            let f = build_forest(&h, &w).map_err(|e| format!("{name} on {w}: {e}"))?;
            let violations = validate_forest(&f, &h);
            check(violations.is_empty(), || format!("{name} on {w}: {violations:?}"))?;
            check(f.height() <= bound, || format!("{name} on {w}: height {} above bound {bound}", f.height()))?;
            built += 1;
        }
        names.push(format!("{name} (bound {bound})"));
    }
    timed(LIMIT_FORESTS, start, format!("{built} forests valid for {}", names.join(", ")))
}

fn ef_threshold() -> Outcome {
    let mut items = 0;
    for arity in 0..=2 {
        for rank in 0..=3 {
            let mut by_sig: HashMap<_, BTreeSet<TypeId>> = HashMap::new();
            let mut by_type: HashMap<TypeId, HashSet<_>> = HashMap::new();
            let mut cases = Vec::new();
            for n in 1..=12 {
                for t in polyreg::interpretation::all_tuples(n, arity) {
                    let sig = threshold_signature(n, &t, rank);
                    let id = rank_type_id(&LinearOrder(n), &t, rank).map_err(|e| e.to_string())?;
                    by_sig.entry(sig.clone()).or_default().insert(id);
                    by_type.entry(id).or_default().insert(sig);
                    cases.push((n, t));
                    items += 1;
                }
            }
            if let Some((sig, ids)) = by_sig.iter().find(|(_, ids)| ids.len() > 1) {
                return Err(format!("arity {arity} rank {rank}: signature {sig:?} spans {} EF classes", ids.len()));
            }
            if let Some((_, sigs)) = by_type.iter().find(|(_, sigs)| sigs.len() > 1) {
                return Err(format!("arity {arity} rank {rank}: one EF class has signatures {sigs:?}"));
            }
            // direct pairwise calls on the smaller orders
            for (n1, t1) in cases.iter().filter(|(n, _)| *n <= 6) {
                for (n2, t2) in cases.iter().filter(|(n, _)| *n <= 6) {
                    let same = threshold_signature(*n1, t1, rank) == threshold_signature(*n2, t2, rank);
                    let ef = ef_equivalent(&LinearOrder(*n1), t1, &LinearOrder(*n2), t2, rank).map_err(|e| e.to_string())?;
                    check(same == ef, || format!("rank {rank}: ({n1},{t1:?}) vs ({n2},{t2:?}): signature {same}, EF {ef}"))?;
                }
            }
        }
    }
    Ok(format!("signature classes equal EF classes on {items} (order, tuple, rank) cases"))
}

#[derive(serde::Deserialize)]
struct OrderFixture {
    k: usize,
    order: String,
}

fn increasing(k: usize, max: usize) -> Vec<Vec<usize>> {
    polyreg::interpretation::all_tuples(max, k).into_iter().filter(|t| t.windows(2).all(|w| w[0] < w[1])).collect()
}

fn rational_domination() -> Outcome {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures().join("orders")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut pairs = 0;
    let mut summary = Vec::new();
    for path in &files {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let fx: OrderFixture = serde_json::from_str(&read(path)).map_err(|e| e.to_string())?;
        check(fx.k <= 3, || format!("{name} has k = {}", fx.k))?;
        let f = parse_formula(&fx.order).map_err(|e| e.to_string())?;
        let (xs, ys) = (indexed_vars("x", fx.k), indexed_vars("y", fx.k));
        let table = rational_order_table(&f, &xs, &ys).map_err(|e| format!("{name}: {e}"))?;
        let (d, p) = rational_dominating_coordinate(&table).map_err(|e| format!("{name}: {e}"))?;
        if fx.k == 1 {
            check(d == 1 && p.abs() == 1, || format!("{name}: k = 1 gave ({d},{p})"))?;
        }
        let mut params = xs.clone();
        params.extend(ys.clone());
        let compiled = CompiledFormula::new(&f, &params);
        let grid = LinearOrder(8);
        for x in increasing(fx.k, 8) {
            for y in increasing(fx.k, 8) {
                let premise = if p > 0 { x[d - 1] < y[d - 1] } else { x[d - 1] > y[d - 1] };
                if premise {
                    let args: Vec<usize> = x.iter().chain(&y).copied().collect();
                    let holds = compiled.eval(&grid, &args).map_err(|e| e.to_string())?;
                    check(holds, || format!("{name}: ({d},{p}) but {x:?} is not below {y:?}"))?;
                    pairs += 1;
                }
            }
        }
        summary.push(format!("{name}=({d},{p:+})"));
    }
    Ok(format!("{} orders, {pairs} grid implications hold: {}", files.len(), summary.join(" ")))
}

fn pipeline_equals_oracle() -> Outcome {
    let start = Instant::now();
    let corpus = fo_enumerators();
    let opts = PipelineOptions::default();
    let mut runs = 0;
    for (name, e) in &corpus {
        let alphabet = e.alphabet.clone().unwrap_or_else(|| vec!['a', 'b']);
        for w in words(&alphabet, 0, 7) {
            let want = enumerate_definable(e, &w).map_err(|err| format!("{name} on {w}: {err}"))?;
            let run = compile_enumeration(e, &w, &opts).map_err(|err| format!("{name} on {w}: {err}"))?;
            check(run.tuples == want, || format!("{name} on {w}: pipeline {:?}, oracle {want:?}", run.tuples))?;
            check(!run.fallback_used, || format!("{name} on {w}: fallback sort used"))?;
            check(run.stats.max_partition <= 2 * e.k + 1, || format!("{name} on {w}: partition of {}", run.stats.max_partition))?;
            runs += 1;
        }
    }
    timed(LIMIT_PIPELINE, start, format!("{} enumerators, {runs} words, no fallback", corpus.len()))
}

/// A unary key on product elements: a coordinate or a definable flag.
struct Key {
    less: String,
    equal: String,
}

fn coordinate_key(factor: usize, index: usize, descending: bool) -> Key {
    let c = format!("{factor}.{index}.{index}");
    let less = if descending { format!("(<@{c} y x)") } else { format!("(<@{c} x y)") };
    Key { less, equal: format!("(=@{c} x y)") }
}

fn flag_key(flag: &str, descending: bool) -> Key {
    let fx = flag.replace("#", "x");
    let fy = flag.replace("#", "y");
    let less = if descending { format!("(and {fx} (not {fy}))") } else { format!("(and (not {fx}) {fy})") };
    Key { less, equal: format!("(iff {fx} {fy})") }
}

fn cascade(keys: &[&Key]) -> String {
    let mut cases = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        let mut parts: Vec<String> = keys[..i].iter().map(|k| k.equal.clone()).collect();
        parts.push(k.less.clone());
        cases.push(format!("(and {})", parts.join(" ")));
    }
    format!("(or {})", cases.join(" "))
}

/// Flags of rank at most 2 about the coordinates of one element `#`.
fn flags(factors: &[(usize, usize)]) -> Vec<String> {
    let mut out = Vec::new();
    for (f, &(_, k)) in factors.iter().enumerate() {
        let f = f + 1;
        out.push(format!("(not (exists z (<@{f} # z)))"));
        out.push(format!("(exists z (and (<@{f} z #) (exists u (<@{f} u z))))"));
        if k == 2 {
            out.push(format!("(<@{f}.1.2 # #)"));
        }
    }
    out
}

fn lexicographic_corollary() -> Outcome {
    let mut products: Vec<Vec<(usize, usize)>> = Vec::new();
    for n in 1..=8 {
        products.push(vec![(n, 1)]);
        products.push(vec![(n, 2)]);
        // (m, n) is (n, m) with the factors swapped
        for m in n..=8 {
            products.push(vec![(n, 1), (m, 1)]);
        }
    }
    // mixed square-by-line products grow as n^6 pairs per order
    for n in 1..=3 {
        products.push(vec![(n, 2), (n, 1)]);
    }
    let mut orders = 0;
    let mut classes = 0;
    for factors in &products {
        let s = ProductStructure::new(factors.clone());
        let coords: Vec<(usize, usize)> =
            factors.iter().enumerate().flat_map(|(f, &(_, k))| (1..=k).map(move |j| (f + 1, j))).collect();
        let tail: Vec<Key> = coords.iter().map(|&(f, j)| coordinate_key(f, j, false)).collect();
        let mut heads: Vec<Key> = Vec::new();
        for &(f, j) in &coords {
            heads.push(coordinate_key(f, j, false));
            heads.push(coordinate_key(f, j, true));
        }
        for flag in flags(factors) {
            heads.push(flag_key(&flag, false));
            heads.push(flag_key(&flag, true));
        }
        let mut prefixes: Vec<Vec<&Key>> = heads.iter().map(|h| vec![h]).collect();
        for a in &heads {
            for b in &heads {
                prefixes.push(vec![a, b]);
            }
        }
        let type_classes = product_type_classes(&s, 2).map_err(|e| e.to_string())?;
        for prefix in prefixes {
            let keys: Vec<&Key> = prefix.into_iter().chain(tail.iter()).collect();
            let f = parse_formula(&cascade(&keys)).map_err(|e| e.to_string())?;
            check(f.quantifier_rank() <= 2, || format!("rank {} order", f.quantifier_rank()))?;
            let order = FormulaOrder::new(&f, &["x".to_string()], &["y".to_string()], &s).map_err(|e| e.to_string())?;
            let encode = |flat: &[usize]| {
                let mut parts = Vec::new();
                let mut rest = flat;
                for &(_, k) in factors {
                    parts.push(rest[..k].to_vec());
                    rest = &rest[k..];
                }
                s.encode(&parts)
            };
            let less = |a: &[usize], b: &[usize]| order.less(&[encode(a)], &[encode(b)]);
            for (_, members) in &type_classes {
                let found = matching_lex_orders(&less, members);
                check(!found.is_empty(), || format!("{factors:?}: order {f} is not lexicographic on a class of {}", members.len()))?;
                classes += 1;
            }
            orders += 1;
        }
    }
    Ok(format!("{orders} rank-2 orders on {} products, all {classes} type restrictions lexicographic", products.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("golden Example 1", golden_example_1),
        ("golden enumerator list", golden_section_4),
        ("interpretations equal programs", theorem_5),
        ("composition soundness", composition),
        ("formula-to-program compiler", lemma_4),
        ("factorization forests", forests),
        ("EF and threshold agreement", ef_threshold),
        ("rational domination", rational_domination),
        ("pipeline equals oracle without fallback", pipeline_equals_oracle),
        ("lexicographic corollary", lexicographic_corollary),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
