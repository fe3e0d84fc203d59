//! Ordered enumeration of definable enumerators.
//!
//! [`enumerate_definable`] filters all tuples and sorts them. It is the
//! reference. [`compile_enumeration`] produces the same list by recursion
//! over intervals of a factorization forest. It never sorts globally. In each
//! interval context the selected tuples are split by their type. Each type
//! class is ordered by a dominating coordinate `d`: the pipeline walks the
//! blocks of `X_d` in polarity order and recurses into the smaller contexts.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use std::sync::{Arc, LazyLock, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domination::{block_certificates, FormulaOrder};
use crate::forprog::{compile_formula_to_program, run_boolean, ForProgram, ProgramError};
use crate::interpretation::{all_tuples, linearize, Interpretation, InterpretationError, OrderViolation};
use crate::logic::{indexed_vars, parse_formula_with, CompiledFormula, EvalConfig, EvalError, Formula, Logic, ParseError};
use crate::semigroup::{build_forest, type_monoid, ForestNode, Homomorphism, SemigroupError};
use crate::structures::{ordered_model, BudgetExceeded, NamedInterval, TypeContext, TypeId, TypeInterner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("invalid enumerator file: {0}")]
    Json(String),
    #[error("formula `{field}`: {source}")]
    Parse { field: String, source: ParseError },
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("formula `{field}` has free variable `{var}`")]
    StrayVariable { field: String, var: String },
    #[error("formula `{0}` uses set quantifiers in a first-order enumerator")]
    SetsInFo(String),
    #[error("the pipeline takes first-order enumerators only")]
    NotFirstOrder,
    #[error("the pipeline takes interpretations with an order formula, not a successor formula")]
    SuccessorOrder,
    #[error("letter `{0}` is outside the alphabet")]
    UnknownLetter(char),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("order is not linear on the selected tuples: {0}")]
    InvalidOrder(OrderViolation),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Interpretation(#[from] InterpretationError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("part {part} lists {earlier:?} before {later:?}, against the order")]
    MergeOrder { part: usize, earlier: Vec<usize>, later: Vec<usize> },
    #[error("height sum did not decrease: {0}")]
    HeightNotDecreasing(String),
}

/// A k-enumerator given by a selection formula over `x1..xk` and a strict
/// order formula over `x1..xk, y1..yk`. A reflexive order formula is accepted
/// as well; only its strict part is used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinableEnumerator {
    pub k: usize,
    pub logic: Logic,
    pub alphabet: Option<Vec<char>>,
    pub selection: Formula,
    pub order: Formula,
}

#[derive(Serialize, Deserialize)]
struct EnumeratorFile {
    k: usize,
    #[serde(default = "default_logic")]
    logic: Logic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<String>,
    select: String,
    order: String,
}

fn default_logic() -> Logic {
    Logic::Fo
}

impl DefinableEnumerator {
    pub fn new(
        k: usize,
        logic: Logic,
        alphabet: Option<Vec<char>>,
        selection: Formula,
        order: Formula,
    ) -> Result<Self, PipelineError> {
        if k == 0 {
            return Err(PipelineError::ZeroArity);
        }
        let xs = indexed_vars("x", k);
        let mut xys = xs.clone();
        xys.extend(indexed_vars("y", k));
        for (field, f, allowed) in [("select", &selection, &xs), ("order", &order, &xys)] {
            if let Some(var) = f.free_vars().into_iter().chain(f.free_set_vars()).find(|v| !allowed.contains(v)) {
                return Err(PipelineError::StrayVariable { field: field.to_string(), var });
            }
            if logic == Logic::Fo && f.is_mso() {
                return Err(PipelineError::SetsInFo(field.to_string()));
            }
        }
        let alphabet = alphabet.map(|a| a.into_iter().collect::<BTreeSet<_>>().into_iter().collect());
        Ok(DefinableEnumerator { k, logic, alphabet, selection, order })
    }

    pub fn from_sources(k: usize, logic: Logic, alphabet: Option<&str>, select: &str, order: &str) -> Result<Self, PipelineError> {
        let parse = |field: &str, src: &str| {
            parse_formula_with(src, logic).map_err(|source| PipelineError::Parse { field: field.to_string(), source })
        };
        Self::new(k, logic, alphabet.map(|a| a.chars().collect()), parse("select", select)?, parse("order", order)?)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let f: EnumeratorFile = serde_json::from_str(text).map_err(|e| PipelineError::Json(e.to_string()))?;
        Self::from_sources(f.k, f.logic, f.alphabet.as_deref(), &f.select, &f.order)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = EnumeratorFile {
            k: self.k,
            logic: self.logic,
            alphabet: self.alphabet.as_ref().map(|a| a.iter().collect()),
            select: self.selection.to_string(),
            order: self.order.to_string(),
        };
        serde_json::to_value(f).expect("enumerator serializes")
    }

    /// The enumerator listing an interpretation's universe in output order.
    pub fn from_interpretation(i: &Interpretation) -> Result<Self, PipelineError> {
        if i.is_successor() {
            return Err(PipelineError::SuccessorOrder);
        }
        Self::new(i.k, i.flavor, Some(i.input_alphabet.clone()), i.universe.clone(), i.order_formula().clone())
    }

    pub fn xs(&self) -> Vec<String> {
        indexed_vars("x", self.k)
    }

    pub fn ys(&self) -> Vec<String> {
        indexed_vars("y", self.k)
    }

    /// The order with tuple equality removed.
    pub fn strict_order(&self) -> Formula {
        Formula::And(vec![self.order.clone(), Formula::not(Formula::tuple_equal(&self.xs(), &self.ys()))])
    }

    fn check_word(&self, w: &str) -> Result<(), PipelineError> {
        match &self.alphabet {
            Some(a) => match w.chars().find(|c| !a.contains(c)) {
                Some(c) => Err(PipelineError::UnknownLetter(c)),
                None => Ok(()),
            },
            None => Ok(()),
        }
    }
}

/// Filters all `|w|^k` tuples by the selection formula and sorts them by the
/// order formula.
pub fn enumerate_definable(e: &DefinableEnumerator, w: &str) -> Result<Vec<Vec<usize>>, PipelineError> {
    e.check_word(w)?;
    let m = ordered_model(w);
    let cfg = EvalConfig::default();
    let select = CompiledFormula::new(&e.selection, &e.xs());
    select.check_model(&m, &cfg)?;
    let mut tuples = Vec::new();
    for t in all_tuples(m.len(), e.k) {
        if select.eval_cfg(&m, &t, &cfg)? {
            tuples.push(t);
        }
    }
    let mut params = e.xs();
    params.extend(e.ys());
    let order = CompiledFormula::new(&e.strict_order(), &params);
    let mut args = vec![0; 2 * e.k];
    let mut rel = Vec::with_capacity(tuples.len());
    for a in &tuples {
        let mut row = Vec::with_capacity(tuples.len());
        for b in &tuples {
            args[..e.k].copy_from_slice(a);
            args[e.k..].copy_from_slice(b);
            row.push(a == b || order.eval_cfg(&m, &args, &cfg)?);
        }
        rel.push(row);
    }
    let idx = linearize(&rel, &tuples).map_err(PipelineError::InvalidOrder)?;
    Ok(idx.into_iter().map(|i| tuples[i].clone()).collect())
}

/// Merges ordered lists into one ordered list without repetitions. Parts
/// may overlap. Each part must already be ordered by `less`.
pub fn merge_enumerations(
    parts: &[Vec<Vec<usize>>],
    less: &dyn Fn(&[usize], &[usize]) -> bool,
) -> Result<Vec<Vec<usize>>, PipelineError> {
    for (part, list) in parts.iter().enumerate() {
        if let Some(pair) = list.windows(2).find(|p| !less(&p[0], &p[1])) {
            return Err(PipelineError::MergeOrder { part, earlier: pair[0].clone(), later: pair[1].clone() });
        }
    }
    let mut heads = vec![0; parts.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for (i, list) in parts.iter().enumerate() {
            if let Some(t) = list.get(heads[i]) {
                if best.is_none_or(|b| less(t, &parts[b][heads[b]])) {
                    best = Some(i);
                }
            }
        }
        let Some(b) = best else { return Ok(out) };
        let t = &parts[b][heads[b]];
        heads[b] += 1;
        if out.last() != Some(t) {
            out.push(t.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineOptions {
    /// Rank of the types that split each context.
    pub type_rank: usize,
    /// Rank of the type homomorphism behind the forest. Lowered until the
    /// type monoid fits the size cap.
    pub forest_rank: usize,
    pub memoize: bool,
    pub trace: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { type_rank: 2, forest_rank: 2, memoize: true, trace: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PipelineStats {
    /// Interval contexts solved.
    pub contexts: usize,
    pub memo_hits: usize,
    /// Largest partition into intervals seen in any context.
    pub max_partition: usize,
    pub forest_rank: usize,
    pub forest_height: usize,
    /// Type classes ordered by the local sort instead of a certificate.
    pub fallback_types: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PipelineRun {
    pub tuples: Vec<Vec<usize>>,
    pub fallback_used: bool,
    pub stats: PipelineStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
}

type MonoidKey = (Vec<char>, usize);

static MONOIDS: LazyLock<Mutex<HashMap<MonoidKey, Option<Arc<Homomorphism>>>>> = LazyLock::new(Default::default);

/// The type homomorphism of the highest rank `<= rank` whose monoid fits
/// the size cap, together with that rank.
fn forest_homomorphism(alphabet: &[char], rank: usize) -> Result<(Arc<Homomorphism>, usize), PipelineError> {
    let mut cache = MONOIDS.lock().unwrap_or_else(|e| e.into_inner());
    for r in (0..=rank).rev() {
        let key = (alphabet.to_vec(), r);
        if !cache.contains_key(&key) {
            let h = match type_monoid(alphabet, r) {
                Ok(m) => Some(Arc::new(m.homomorphism)),
                Err(SemigroupError::TooLarge(_)) => None,
                Err(e) => return Err(e.into()),
            };
            cache.insert(key.clone(), h);
        }
        if let Some(h) = &cache[&key] {
            return Ok((h.clone(), r));
        }
    }
    unreachable!("the rank-0 type monoid is trivial")
}

/// An interval of the forest: a node, or a run of at least two consecutive
/// siblings that is not all of their parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Interval {
    Node(usize),
    Run { parent: usize, from: usize, to: usize },
}

struct Arena {
    span: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
    height: Vec<usize>,
}

impl Arena {
    fn new(root: &ForestNode) -> Self {
        let mut a = Arena { span: Vec::new(), children: Vec::new(), height: Vec::new() };
        a.push(root);
        a
    }

    fn push(&mut self, n: &ForestNode) -> usize {
        let id = self.span.len();
        self.span.push((n.first, n.last));
        self.children.push(Vec::new());
        self.height.push(1);
        let kids: Vec<usize> = n.children.iter().map(|c| self.push(c)).collect();
        self.height[id] = 1 + kids.iter().map(|&c| self.height[c]).max().unwrap_or(0);
        self.children[id] = kids;
        id
    }

    fn span(&self, iv: Interval) -> (usize, usize) {
        match iv {
            Interval::Node(n) => self.span[n],
            Interval::Run { parent, from, to } => {
                let c = &self.children[parent];
                (self.span[c[from]].0, self.span[c[to]].1)
            }
        }
    }

    fn height(&self, iv: Interval) -> usize {
        match iv {
            Interval::Node(n) => self.height[n],
            Interval::Run { parent, from, to } => {
                1 + self.children[parent][from..=to].iter().map(|&c| self.height[c]).max().unwrap_or(0)
            }
        }
    }

    /// Blocks of an interval as node ids. A leaf is its own block.
    fn blocks(&self, iv: Interval) -> Vec<usize> {
        match iv {
            Interval::Node(n) if self.children[n].is_empty() => vec![n],
            Interval::Node(n) => self.children[n].clone(),
            Interval::Run { parent, from, to } => self.children[parent][from..=to].to_vec(),
        }
    }

    /// The union of blocks `from..=to` of `iv`, as an interval.
    fn sub(&self, iv: Interval, from: usize, to: usize) -> Interval {
        let (parent, offset) = match iv {
            Interval::Node(n) => (n, 0),
            Interval::Run { parent, from, .. } => (parent, from),
        };
        let (a, b) = (offset + from, offset + to);
        if a == b {
            Interval::Node(self.children[parent][a])
        } else if a == 0 && b + 1 == self.children[parent].len() {
            Interval::Node(parent)
        } else {
            Interval::Run { parent, from: a, to: b }
        }
    }

    fn show(&self, iv: Interval) -> String {
        let (a, b) = self.span(iv);
        format!("[{a},{b}]")
    }
}

struct Solver<'a> {
    k: usize,
    word: &'a str,
    arena: Arena,
    select: ForProgram,
    member: HashMap<Vec<usize>, bool>,
    order: &'a dyn Fn(&[usize], &[usize]) -> bool,
    opts: &'a PipelineOptions,
    memo: HashMap<Vec<Interval>, Rc<Vec<Vec<usize>>>>,
    stats: PipelineStats,
    fallback: bool,
    trace: RefCell<Vec<String>>,
}

impl Solver<'_> {
    fn note(&self, depth: usize, line: impl FnOnce() -> String) {
        if self.opts.trace {
            self.trace.borrow_mut().push(format!("{}{}", "  ".repeat(depth), line()));
        }
    }

    fn selected(&mut self, t: &[usize]) -> Result<bool, PipelineError> {
        if let Some(&b) = self.member.get(t) {
            return Ok(b);
        }
        let b = run_boolean(&self.select, self.word, t)?;
        self.member.insert(t.to_vec(), b);
        Ok(b)
    }

    fn context_name(&self, ivs: &[Interval]) -> String {
        ivs.iter().enumerate().map(|(i, &iv)| format!("X{}={}", i + 1, self.arena.show(iv))).collect::<Vec<_>>().join(" ")
    }

    /// Selected tuples of `X1 × … × Xk` in order.
    fn solve(&mut self, ivs: &[Interval], depth: usize) -> Result<Rc<Vec<Vec<usize>>>, PipelineError> {
        if self.opts.memoize {
            if let Some(r) = self.memo.get(ivs) {
                let r = r.clone();
                self.stats.memo_hits += 1;
                self.note(depth, || format!("enumerate {} (memoized)", self.context_name(ivs)));
                return Ok(r);
            }
        }
        self.stats.contexts += 1;
        self.note(depth, || format!("enumerate {}", self.context_name(ivs)));
        let result = if ivs.iter().all(|&iv| self.arena.height(iv) == 1) {
            let t: Vec<usize> = ivs.iter().map(|&iv| self.arena.span(iv).0).collect();
            let keep = self.selected(&t)?;
            self.note(depth + 1, || format!("if selected {t:?} -> {keep}"));
            if keep {
                vec![t]
            } else {
                vec![]
            }
        } else {
            self.split(ivs, depth + 1)?
        };
        let result = Rc::new(result);
        if self.opts.memoize {
            self.memo.insert(ivs.to_vec(), result.clone());
        }
        Ok(result)
    }

    fn split(&mut self, ivs: &[Interval], depth: usize) -> Result<Vec<Vec<usize>>, PipelineError> {
        let n = self.word.chars().count();
        let distinct: BTreeMap<(usize, usize), Interval> = ivs.iter().map(|&iv| (self.arena.span(iv), iv)).collect();
        let mut lengths = Vec::new();
        let mut parts = 0;
        let mut cursor = 1;
        for (&(first, last), &iv) in &distinct {
            if first > cursor {
                lengths.push(first - cursor);
                parts += 1;
            }
            lengths.extend(self.arena.blocks(iv).iter().map(|&b| self.arena.span[b].1 + 1 - self.arena.span[b].0));
            parts += 1;
            cursor = last + 1;
        }
        if cursor <= n {
            lengths.push(n + 1 - cursor);
            parts += 1;
        }
        self.stats.max_partition = self.stats.max_partition.max(parts);
        let named = ivs
            .iter()
            .enumerate()
            .map(|(i, &iv)| {
                let (first, last) = self.arena.span(iv);
                NamedInterval { name: format!("X{}", i + 1), first, last }
            })
            .collect();
        let s = ordered_model(self.word)
            .with_block_lengths(&lengths)
            .and_then(|s| s.with_intervals(named))
            .expect("forest intervals partition the word");
        self.note(depth, || format!("partition {}", s.block_spans().iter().map(|(a, b)| format!("[{a},{b}]")).collect::<Vec<_>>().join(" ")));

        let ranges: Vec<(usize, usize)> = ivs.iter().map(|&iv| self.arena.span(iv)).collect();
        let mut candidates = Vec::new();
        for t in product(&ranges) {
            if self.selected(&t)? {
                candidates.push(t);
            }
        }
        let mut ctx = TypeContext::new(&s);
        let mut interner = TypeInterner::new();
        let mut classes: Vec<(TypeId, Vec<Vec<usize>>)> = Vec::new();
        for t in candidates {
            let id = interner.type_of(&mut ctx, &t, self.opts.type_rank)?;
            match classes.iter_mut().find(|(c, _)| *c == id) {
                Some((_, members)) => members.push(t),
                None => classes.push((id, vec![t])),
            }
        }

        let mut lists = Vec::with_capacity(classes.len());
        for (n_type, (_, members)) in classes.into_iter().enumerate() {
            let refs: Vec<&[usize]> = members.iter().map(Vec::as_slice).collect();
            let cert = block_certificates(self.order, &s, &refs)
                .into_iter()
                .find(|&(d, _)| self.arena.height(ivs[d - 1]) > 1);
            match cert {
                Some((d, p)) => lists.push(self.by_blocks(ivs, &members, d, p, n_type + 1, depth)?),
                None => {
                    self.fallback = true;
                    self.stats.fallback_types += 1;
                    self.note(depth, || format!("type {} ({} tuples): no dominating coordinate, sort locally", n_type + 1, members.len()));
                    let mut sorted = members;
                    let less = self.order;
                    sorted.sort_by(|a, b| if less(a, b) { std::cmp::Ordering::Less } else if less(b, a) { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Equal });
                    lists.push(sorted);
                }
            }
        }
        if lists.len() > 1 {
            self.note(depth, || format!("merge {} types", lists.len()));
        }
        merge_enumerations(&lists, self.order)
    }

    /// Orders one type class whose order is dominated by coordinate `d` with polarity `p`.
    fn by_blocks(
        &mut self,
        ivs: &[Interval],
        members: &[Vec<usize>],
        d: usize,
        p: isize,
        n_type: usize,
        depth: usize,
    ) -> Result<Vec<Vec<usize>>, PipelineError> {
        let xd = ivs[d - 1];
        let blocks = self.arena.blocks(xd);
        self.note(depth, || {
            let dir = if p > 0 { "up" } else { "down" };
            format!("type {n_type} ({} tuples): for block of X{d} {dir}", members.len())
        });
        let class: HashSet<&[usize]> = members.iter().map(Vec::as_slice).collect();
        let before: usize = ivs.iter().map(|&iv| self.arena.height(iv)).sum();
        let order: Vec<usize> = if p > 0 { (0..blocks.len()).collect() } else { (0..blocks.len()).rev().collect() };
        let mut out = Vec::new();
        for j in order {
            let block = Interval::Node(blocks[j]);
            let (bf, bl) = self.arena.span(block);
            if !members.iter().any(|t| bf <= t[d - 1] && t[d - 1] <= bl) {
                continue;
            }
            self.note(depth + 1, || format!("block {}", self.arena.show(block)));
            let options: Vec<Vec<Interval>> = (0..self.k)
                .map(|i| {
                    if i == d - 1 {
                        vec![block]
                    } else if ivs[i] == xd {
                        let mut o = Vec::new();
                        if j > 0 {
                            o.push(self.arena.sub(xd, 0, j - 1));
                        }
                        o.push(block);
                        if j + 1 < blocks.len() {
                            o.push(self.arena.sub(xd, j + 1, blocks.len() - 1));
                        }
                        o
                    } else {
                        vec![ivs[i]]
                    }
                })
                .collect();
            let mut sub_lists = Vec::new();
            for ys in cartesian(&options) {
                let spans: Vec<(usize, usize)> = ys.iter().map(|&y| self.arena.span(y)).collect();
                let inside = |t: &Vec<usize>| t.iter().zip(&spans).all(|(&x, &(a, b))| a <= x && x <= b);
                if !members.iter().any(inside) {
                    continue;
                }
                let after: usize = ys.iter().map(|&y| self.arena.height(y)).sum();
                if after >= before {
                    return Err(PipelineError::HeightNotDecreasing(self.context_name(&ys)));
                }
                let sub = self.solve(&ys, depth + 2)?;
                sub_lists.push(sub.iter().filter(|t| class.contains(t.as_slice())).cloned().collect::<Vec<_>>());
            }
            out.extend(merge_enumerations(&sub_lists, self.order)?);
        }
        Ok(out)
    }
}

/// All tuples with the i-th entry in `ranges[i]`, lexicographically.
fn product(ranges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let options: Vec<Vec<usize>> = ranges.iter().map(|&(a, b)| (a..=b).collect()).collect();
    cartesian(&options)
}

fn cartesian<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        out = out.into_iter().flat_map(|prefix| opts.iter().map(move |o| [prefix.clone(), vec![o.clone()]].concat())).collect();
    }
    out
}

/// Enumerates the selected tuples in order by forest recursion. The result
/// equals [`enumerate_definable`]; `fallback_used` reports whether some type
/// class had to be sorted locally for lack of a dominating coordinate.
pub fn compile_enumeration(e: &DefinableEnumerator, w: &str, opts: &PipelineOptions) -> Result<PipelineRun, PipelineError> {
    if e.logic != Logic::Fo {
        return Err(PipelineError::NotFirstOrder);
    }
    e.check_word(w)?;
    if w.is_empty() {
        return Ok(PipelineRun::default());
    }
    let alphabet: Vec<char> = match &e.alphabet {
        Some(a) => a.clone(),
        None => w.chars().collect::<BTreeSet<_>>().into_iter().collect(),
    };
    let (h, forest_rank) = forest_homomorphism(&alphabet, opts.forest_rank)?;
    let forest = build_forest(&h, w)?;
    let model = ordered_model(w);
    let order = FormulaOrder::new(&e.strict_order(), &e.xs(), &e.ys(), &model)?;
    let less = |x: &[usize], y: &[usize]| order.less(x, y);
    let mut solver = Solver {
        k: e.k,
        word: w,
        arena: Arena::new(&forest.root),
        select: compile_formula_to_program(&e.selection, &e.xs())?,
        member: HashMap::new(),
        order: &less,
        opts,
        memo: HashMap::new(),
        stats: PipelineStats { forest_rank, forest_height: forest.height(), ..Default::default() },
        fallback: false,
        trace: RefCell::new(Vec::new()),
    };
    let root = vec![Interval::Node(0); e.k];
    let tuples = solver.solve(&root, 0)?;
    Ok(PipelineRun { tuples: tuples.to_vec(), fallback_used: solver.fallback, stats: solver.stats, trace: solver.trace.into_inner() })
}

/// Output of [`interpret_via_pipeline`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineInterpretation {
    pub output: String,
    pub run: PipelineRun,
}

/// Evaluates a first-order interpretation by enumerating its universe with
/// [`compile_enumeration`] and labelling each tuple with the compiled label
/// programs.
pub fn interpret_via_pipeline(i: &Interpretation, w: &str, opts: &PipelineOptions) -> Result<PipelineInterpretation, PipelineError> {
    if i.flavor != Logic::Fo {
        return Err(PipelineError::NotFirstOrder);
    }
    let e = DefinableEnumerator::from_interpretation(i)?;
    if let Some(c) = w.chars().find(|c| !i.input_alphabet.contains(c)) {
        return Err(InterpretationError::UnknownLetter(c).into());
    }
    let run = compile_enumeration(&e, w, opts)?;
    let xs = e.xs();
    let labels = i
        .labels
        .iter()
        .map(|(&c, f)| Ok((c, compile_formula_to_program(f, &xs)?)))
        .collect::<Result<Vec<(char, ForProgram)>, PipelineError>>()?;
    let mut output = String::new();
    for t in &run.tuples {
        let mut hits = Vec::new();
        for (c, p) in &labels {
            if run_boolean(p, w, t)? {
                hits.push(*c);
            }
        }
        match hits[..] {
            [c] => output.push(c),
            [] => return Err(InterpretationError::NoLabel(t.clone()).into()),
            _ => return Err(InterpretationError::LabelConflict { tuple: t.clone(), letters: hits }.into()),
        }
    }
    Ok(PipelineInterpretation { output, run })
}

impl fmt::Display for PipelineRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> =
            self.tuples.iter().map(|t| format!("({})", t.iter().map(usize::to_string).collect::<Vec<_>>().join(","))).collect();
        write!(f, "{}", ts.join(","))
    }
}
