use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use polyreg::domination::{find_domination, rational_domination_candidates, rational_dominating_coordinate, rational_order_table, FormulaOrder};
use polyreg::forprog::{parse_program, run_enumerator, run_traced, ForProgram, Mode};
use polyreg::interpretation::{compose_fo, evaluate_interpretation, Interpretation};
use polyreg::logic::{indexed_vars, parse_formula};
use polyreg::pipeline::{compile_enumeration, enumerate_definable, interpret_via_pipeline, DefinableEnumerator, PipelineOptions};
use polyreg::rational::{eval_rational, RationalTransducer};
use polyreg::semigroup::{build_forest, height_bound, validate_forest, Homomorphism};
use polyreg::structures::ordered_model;

use crate::{corpus, Cli, Command};

/// Runs one command. `Ok(false)` means the command ran but found a
/// negative answer (a difference, a gap, a failed check).
pub fn dispatch(cli: Cli) -> Result<bool> {
    let json = cli.json;
    match cli.command {
        Command::EvalInterp { file, input, trace } => eval_interp(&file, &input, trace, json),
        Command::RunForp { file, input, args, trace } => run_forp(&file, &input, &args, trace, json),
        Command::Enumerate { file, input } => enumerate(&file, &input, json),
        Command::Pipeline { file, input, rank, forest_rank, no_memo, trace, emit_trace } => {
            let opts = PipelineOptions { type_rank: rank, forest_rank, memoize: !no_memo, trace: trace || emit_trace.is_some() };
            pipeline(&file, &input, &opts, trace, emit_trace.as_deref(), json)
        }
        Command::Compose { first, second, input } => compose(&first, &second, input.as_deref(), json),
        Command::Forest { file, input } => forest(&file, &input, json),
        Command::Dominate { file, input, blocks, rank } => dominate(&file, &input, &blocks, rank, json),
        Command::RationalDominate { file } => rational_dominate(&file, json),
        Command::CheckEquiv { left, right, max_len, alphabet } => check_equiv(&left, &right, max_len, alphabet.as_deref(), json),
        Command::CorpusCheck { dir, max_len } => corpus::run(&dir, max_len, json),
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_interpretation(path: &Path) -> Result<Interpretation> {
    Interpretation::from_json(&read(path)?).with_context(|| format!("malformed interpretation {}", path.display()))
}

pub fn load_program(path: &Path) -> Result<ForProgram> {
    parse_program(&read(path)?).with_context(|| format!("malformed program {}", path.display()))
}

/// An enumerator file, or an interpretation whose universe and order are
/// read as one.
pub fn load_enumerator(path: &Path) -> Result<(DefinableEnumerator, Option<Interpretation>)> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))?;
    if value.get("select").is_some() {
        let e = DefinableEnumerator::from_json(&text).with_context(|| format!("malformed enumerator {}", path.display()))?;
        return Ok((e, None));
    }
    let i = load_interpretation(path)?;
    let e = DefinableEnumerator::from_interpretation(&i)?;
    Ok((e, Some(i)))
}

pub fn tuples_text(tuples: &[Vec<usize>]) -> String {
    let parts: Vec<String> =
        tuples.iter().map(|t| format!("({})", t.iter().map(usize::to_string).collect::<Vec<_>>().join(","))).collect();
    parts.join(",")
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn eval_interp(file: &Path, input: &str, trace: bool, json: bool) -> Result<bool> {
    let i = load_interpretation(file)?;
    let e = evaluate_interpretation(&i, input)?;
    if trace {
        for (t, c) in e.tuples.iter().zip(e.output.chars()) {
            eprintln!("{} {c}", tuples_text(std::slice::from_ref(t)));
        }
    }
    if json {
        print_json(&serde_json::to_value(&e)?);
    } else {
        println!("{}", e.output);
    }
    Ok(true)
}

fn run_forp(file: &Path, input: &str, args: &[usize], trace: bool, json: bool) -> Result<bool> {
    let p = load_program(file)?;
    let out = run_traced(&p, input, args, trace)?;
    for line in &out.trace {
        eprintln!("{line}");
    }
    let (text, value) = match p.mode() {
        Mode::Letter => (out.letters.clone(), json!({ "mode": "letter", "output": out.letters })),
        Mode::Tuple(_) => {
            let tuples = run_enumerator(&p, input)?;
            (tuples_text(&tuples), json!({ "mode": "tuple", "tuples": tuples }))
        }
        Mode::Boolean => {
            let b = out.returned.unwrap_or(false);
            (b.to_string(), json!({ "mode": "boolean", "result": b }))
        }
    };
    if json {
        print_json(&value);
    } else {
        println!("{text}");
    }
    Ok(true)
}

fn enumerate(file: &Path, input: &str, json: bool) -> Result<bool> {
    let (e, _) = load_enumerator(file)?;
    let tuples = enumerate_definable(&e, input)?;
    if json {
        print_json(&json!({ "tuples": tuples }));
    } else {
        println!("{}", tuples_text(&tuples));
    }
    Ok(true)
}

fn pipeline(file: &Path, input: &str, opts: &PipelineOptions, trace: bool, emit: Option<&Path>, json: bool) -> Result<bool> {
    let (e, interp) = load_enumerator(file)?;
    let (run, output) = match &interp {
        Some(i) => {
            let r = interpret_via_pipeline(i, input, opts)?;
            (r.run, Some(r.output))
        }
        None => (compile_enumeration(&e, input, opts)?, None),
    };
    if trace {
        for line in &run.trace {
            eprintln!("{line}");
        }
    }
    if let Some(path) = emit {
        let mut text = run.trace.join("\n");
        text.push('\n');
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if run.fallback_used {
        eprintln!("warning: {} type classes ordered by local sort", run.stats.fallback_types);
    }
    if json {
        let mut v = serde_json::to_value(&run)?;
        v.as_object_mut().expect("run is an object").remove("trace");
        if let Some(o) = &output {
            v["output"] = json!(o);
        }
        print_json(&v);
    } else {
        match output {
            Some(o) => println!("{o}"),
            None => println!("{run}"),
        }
    }
    Ok(true)
}

fn compose(first: &Path, second: &Path, input: Option<&str>, json: bool) -> Result<bool> {
    let f = load_interpretation(first)?;
    let g = load_interpretation(second)?;
    let c = compose_fo(&f, &g)?;
    match input {
        Some(w) => {
            let e = evaluate_interpretation(&c, w)?;
            if json {
                print_json(&serde_json::to_value(&e)?);
            } else {
                println!("{}", e.output);
            }
        }
        None => print_json(&c.to_json()),
    }
    Ok(true)
}

fn forest(file: &Path, input: &str, json: bool) -> Result<bool> {
    let h = Homomorphism::from_json(&read(file)?).with_context(|| format!("malformed homomorphism {}", file.display()))?;
    let f = build_forest(&h, input)?;
    let violations = validate_forest(&f, &h);
    let bound = height_bound(&h)?;
    if json {
        let mut v = f.to_json();
        v["bound"] = json!(bound);
        v["violations"] = serde_json::to_value(&violations)?;
        print_json(&v);
    } else {
        print!("{}", f.to_text(&h));
        println!("height {} (bound {bound})", f.height());
        for v in &violations {
            println!("violation: {v:?}");
        }
    }
    Ok(violations.is_empty() && f.height() <= bound)
}

fn dominate(file: &Path, input: &str, blocks: &[usize], rank: usize, json: bool) -> Result<bool> {
    let (e, _) = load_enumerator(file)?;
    let tuples = enumerate_definable(&e, input)?;
    let lengths = if blocks.is_empty() { vec![1; input.chars().count()] } else { blocks.to_vec() };
    let m = ordered_model(input).with_block_lengths(&lengths)?;
    let order = FormulaOrder::new(&e.strict_order(), &e.xs(), &e.ys(), &m)?;
    let report = find_domination(&|x, y| order.less(x, y), &m, &tuples, rank)?;
    if json {
        print_json(&report.to_json());
    } else {
        let mut seen = Vec::new();
        for c in &report.certificates {
            if seen.contains(&c.type_id) {
                continue;
            }
            seen.push(c.type_id);
            let found: Vec<String> =
                report.certificates.iter().filter(|x| x.type_id == c.type_id).map(|x| format!("d={} p={:+}", x.d, x.p)).collect();
            println!(
                "type {}.{} ({} tuples, least {}): {}",
                c.type_id.rank,
                c.type_id.id,
                c.class_size,
                tuples_text(std::slice::from_ref(&c.representative)),
                found.join(", ")
            );
        }
        for g in &report.gaps {
            println!(
                "type {}.{} ({} tuples, least {}): no dominating coordinate",
                g.type_id.rank,
                g.type_id.id,
                g.class_size,
                tuples_text(std::slice::from_ref(&g.representative))
            );
        }
    }
    Ok(report.is_complete())
}

fn rational_dominate(file: &Path, json: bool) -> Result<bool> {
    let v: Value = serde_json::from_str(&read(file)?).with_context(|| format!("malformed JSON in {}", file.display()))?;
    let k = v["k"].as_u64().context("order file needs a positive `k`")? as usize;
    let text = v["order"].as_str().context("order file needs an `order` formula")?;
    let f = parse_formula(text)?;
    let table = rational_order_table(&f, &indexed_vars("x", k), &indexed_vars("y", k))?;
    let (d, p) = rational_dominating_coordinate(&table)?;
    let candidates = rational_domination_candidates(&table);
    if json {
        print_json(&json!({ "k": k, "d": d, "p": p, "candidates": candidates, "order_types": table.len() }));
    } else {
        println!("d={d} p={p:+}");
    }
    Ok(true)
}

/// Anything that maps words to words.
enum Function {
    Interpretation(Interpretation),
    Program(ForProgram),
    Transducer(RationalTransducer),
}

impl Function {
    fn load(path: &Path) -> Result<Function> {
        if path.extension().is_some_and(|x| x == "forp") {
            return Ok(Function::Program(load_program(path)?));
        }
        let text = read(path)?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))?;
        if value.get("transitions").is_some() {
            let t = RationalTransducer::from_json(&text).with_context(|| format!("malformed transducer {}", path.display()))?;
            return Ok(Function::Transducer(t));
        }
        Ok(Function::Interpretation(load_interpretation(path)?))
    }

    fn alphabet(&self) -> Option<Vec<char>> {
        match self {
            Function::Interpretation(i) => Some(i.input_alphabet.clone()),
            Function::Transducer(t) => Some(t.input_alphabet().into_iter().collect()),
            Function::Program(_) => None,
        }
    }

    fn apply(&self, w: &str) -> Result<String, String> {
        match self {
            Function::Interpretation(i) => evaluate_interpretation(i, w).map(|e| e.output).map_err(|e| e.to_string()),
            Function::Program(p) => polyreg::forprog::run_program(p, w).map_err(|e| e.to_string()),
            Function::Transducer(t) => eval_rational(t, w).map_err(|e| e.to_string()),
        }
    }
}

/// Every word over `alphabet` with length in `min..=max`, shortest first,
/// then in alphabet order.
pub fn words(alphabet: &[char], min: usize, max: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer = vec![String::new()];
    for len in 0..=max {
        if len >= min {
            out.extend(layer.iter().cloned());
        }
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |&c| format!("{w}{c}"))).collect();
    }
    out
}

fn check_equiv(left: &Path, right: &Path, max_len: usize, alphabet: Option<&str>, json: bool) -> Result<bool> {
    let l = Function::load(left)?;
    let r = Function::load(right)?;
    let alphabet: Vec<char> = match alphabet {
        Some(a) => a.chars().collect(),
        None => l.alphabet().or_else(|| r.alphabet()).unwrap_or_else(|| vec!['a', 'b']),
    };
    if alphabet.is_empty() {
        bail!("empty alphabet");
    }
    let ws = words(&alphabet, 2, max_len);
    for w in &ws {
        let (a, b) = (l.apply(w), r.apply(w));
        if a != b {
            let show = |x: &Result<String, String>| match x {
                Ok(s) => s.clone(),
                Err(e) => format!("error: {e}"),
            };
            if json {
                print_json(&json!({ "equivalent": false, "word": w, "left": show(&a), "right": show(&b) }));
            } else {
                println!("DIFFERENT on {w}: {} vs {}", show(&a), show(&b));
            }
            return Ok(false);
        }
    }
    if json {
        print_json(&json!({ "equivalent": true, "words_tested": ws.len() }));
    } else {
        println!("EQUIVALENT (words tested: {})", ws.len());
    }
    Ok(true)
}
