//! String-to-string interpretations.
//!
//! A `k`-dimensional interpretation represents output positions by `k`-tuples
//! of input positions. Formulas use the variables `x1..xk` (and `y1..yk` for
//! the order). Order formulas are read reflexively: a strict formula is
//! accepted and tuple equality is added to it.

use crate::logic::{
    indexed_vars, parse_formula_with, substitute_with, CompiledFormula, EvalConfig, EvalError, Formula, Logic, Model,
    ParseError, RelationMap, SubstError, Substitution, Template,
};
use crate::structures::{ordered_model, successor_model, WordStructure};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpretationError {
    #[error("invalid interpretation file: {0}")]
    Json(String),
    #[error("formula `{field}`: {source}")]
    Parse { field: String, source: ParseError },
    #[error("formula `{field}` has free variable `{var}`; allowed are {allowed}")]
    StrayVariable { field: String, var: String, allowed: String },
    #[error("formula `{0}` uses set quantifiers in a first-order interpretation")]
    SetsInFo(String),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("output letters and label formulas differ: letters {letters:?}, formulas for {formulas:?}")]
    LabelMismatch { letters: Vec<char>, formulas: Vec<char> },
    #[error("input letter `{0}` is outside the input alphabet")]
    UnknownLetter(char),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("order is not linear on the universe: {0}")]
    InvalidOrder(OrderViolation),
    #[error("tuple {0:?} satisfies no label formula")]
    NoLabel(Vec<usize>),
    #[error("tuple {tuple:?} satisfies the label formulas of {letters:?}")]
    LabelConflict { tuple: Vec<usize>, letters: Vec<char> },
    #[error("composition needs first-order interpretations")]
    MsoComposition,
    #[error("composition is defined for ordered outputs only")]
    SuccessorComposition,
    #[error("output alphabet {0:?} of the first stage is not contained in input alphabet {1:?} of the second")]
    AlphabetMismatch(Vec<char>, Vec<char>),
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// The first violation of linearity found on a universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderViolation {
    NotTotal { a: Vec<usize>, b: Vec<usize> },
    NotAntisymmetric { a: Vec<usize>, b: Vec<usize> },
    NotTransitive { a: Vec<usize>, b: Vec<usize>, c: Vec<usize> },
    /// Successor relation that is not a single path through the universe.
    NotAPath { detail: String },
}

impl std::fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderViolation::NotTotal { a, b } => write!(f, "{a:?} and {b:?} are incomparable"),
            OrderViolation::NotAntisymmetric { a, b } => write!(f, "{a:?} and {b:?} precede each other"),
            OrderViolation::NotTransitive { a, b, c } => write!(f, "cycle {a:?} < {b:?} < {c:?} < {a:?}"),
            OrderViolation::NotAPath { detail } => write!(f, "successor relation is not a path: {detail}"),
        }
    }
}

/// How output positions are ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputOrder {
    /// A (reflexive or strict) linear order on tuples.
    Order(Formula),
    /// A successor relation on tuples; input and output are successor models.
    Successor(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub flavor: Logic,
    pub k: usize,
    pub input_alphabet: Vec<char>,
    pub output_alphabet: Vec<char>,
    pub universe: Formula,
    pub labels: BTreeMap<char, Formula>,
    pub order: OutputOrder,
}

#[derive(Serialize, Deserialize)]
struct InterpretationFile {
    flavor: Logic,
    k: usize,
    input_alphabet: String,
    output_alphabet: String,
    universe: String,
    labels: BTreeMap<char, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    successor: Option<String>,
}

/// Result of evaluating an interpretation on one word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub output: String,
    /// Output positions as tuples, in output order.
    pub tuples: Vec<Vec<usize>>,
    /// Inputs shorter than 2 are outside the function class; they are
    /// still evaluated by the raw semantics.
    pub below_threshold: bool,
}

/// Outcome of [`validate_order`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub universe_size: usize,
    pub violation: Option<OrderViolation>,
}

impl OrderReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

impl Interpretation {
    /// Builds and checks an interpretation.
    pub fn new(
        flavor: Logic,
        k: usize,
        input_alphabet: Vec<char>,
        output_alphabet: Vec<char>,
        universe: Formula,
        labels: BTreeMap<char, Formula>,
        order: OutputOrder,
    ) -> Result<Self, InterpretationError> {
        let i = Interpretation { flavor, k, input_alphabet, output_alphabet, universe, labels, order };
        i.check()?;
        Ok(i)
    }

    fn check(&self) -> Result<(), InterpretationError> {
        if self.k == 0 {
            return Err(InterpretationError::ZeroDimension);
        }
        let xs = indexed_vars("x", self.k);
        let mut xys = xs.clone();
        xys.extend(indexed_vars("y", self.k));
        let check = |field: String, f: &Formula, allowed: &[String]| {
            if self.flavor == Logic::Fo && f.is_mso() {
                return Err(InterpretationError::SetsInFo(field));
            }
            if let Some(var) = f.free_vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(InterpretationError::StrayVariable { field, var, allowed: allowed.join(",") });
            }
            if let Some(set) = f.free_set_vars().into_iter().next() {
                return Err(InterpretationError::StrayVariable { field, var: set, allowed: allowed.join(",") });
            }
            Ok(())
        };
        check("universe".into(), &self.universe, &xs)?;
        for (c, f) in &self.labels {
            check(format!("labels.{c}"), f, &xs)?;
        }
        check("order".into(), self.order_formula(), &xys)?;
        let letters: BTreeSet<char> = self.output_alphabet.iter().copied().collect();
        let formulas: BTreeSet<char> = self.labels.keys().copied().collect();
        if letters != formulas {
            return Err(InterpretationError::LabelMismatch {
                letters: letters.into_iter().collect(),
                formulas: formulas.into_iter().collect(),
            });
        }
        Ok(())
    }

    pub fn order_formula(&self) -> &Formula {
        match &self.order {
            OutputOrder::Order(f) | OutputOrder::Successor(f) => f,
        }
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.order, OutputOrder::Successor(_))
    }

    /// The reflexive order formula: the given formula or tuple equality.
    pub fn reflexive_order(&self) -> Formula {
        let xs = indexed_vars("x", self.k);
        let ys = indexed_vars("y", self.k);
        Formula::Or(vec![self.order_formula().clone(), Formula::tuple_equal(&xs, &ys)])
    }

    pub fn from_json(text: &str) -> Result<Self, InterpretationError> {
        let f: InterpretationFile = serde_json::from_str(text).map_err(|e| InterpretationError::Json(e.to_string()))?;
        let parse = |field: &str, src: &str| {
            parse_formula_with(src, f.flavor).map_err(|source| InterpretationError::Parse { field: field.to_string(), source })
        };
        let order = match (&f.order, &f.successor) {
            (Some(o), None) => OutputOrder::Order(parse("order", o)?),
            (None, Some(s)) => OutputOrder::Successor(parse("successor", s)?),
            _ => return Err(InterpretationError::Json("exactly one of `order` and `successor` is required".into())),
        };
        let mut labels = BTreeMap::new();
        for (c, src) in &f.labels {
            labels.insert(*c, parse(&format!("labels.{c}"), src)?);
        }
        Interpretation::new(
            f.flavor,
            f.k,
            f.input_alphabet.chars().collect(),
            f.output_alphabet.chars().collect(),
            parse("universe", &f.universe)?,
            labels,
            order,
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (order, successor) = match &self.order {
            OutputOrder::Order(f) => (Some(f.to_string()), None),
            OutputOrder::Successor(f) => (None, Some(f.to_string())),
        };
        serde_json::to_value(InterpretationFile {
            flavor: self.flavor,
            k: self.k,
            input_alphabet: self.input_alphabet.iter().collect(),
            output_alphabet: self.output_alphabet.iter().collect(),
            universe: self.universe.to_string(),
            labels: self.labels.iter().map(|(c, f)| (*c, f.to_string())).collect(),
            order,
            successor,
        })
        .expect("interpretation serializes")
    }

    /// The input structure for `w`: ordered model, or successor model for
    /// successor interpretations.
    pub fn input_model(&self, w: &str) -> Result<WordStructure, InterpretationError> {
        if let Some(c) = w.chars().find(|c| !self.input_alphabet.contains(c)) {
            return Err(InterpretationError::UnknownLetter(c));
        }
        Ok(if self.is_successor() { successor_model(w) } else { ordered_model(w) })
    }

    /// Universe tuples in lexicographic order of positions.
    pub fn universe_tuples(&self, m: &WordStructure) -> Result<Vec<Vec<usize>>, InterpretationError> {
        let u = CompiledFormula::new(&self.universe, &indexed_vars("x", self.k));
        u.check_model(m, &EvalConfig::default())?;
        Ok(all_tuples(m.size(), self.k).into_iter().filter(|t| u.eval_unchecked(m, t)).collect())
    }

    /// The unique output letter of a universe tuple.
    pub fn label_of(&self, m: &WordStructure, compiled: &[(char, CompiledFormula)], t: &[usize]) -> Result<char, InterpretationError> {
        let hits: Vec<char> = compiled.iter().filter(|(_, f)| f.eval_unchecked(m, t)).map(|(c, _)| *c).collect();
        match hits.as_slice() {
            [c] => Ok(*c),
            [] => Err(InterpretationError::NoLabel(t.to_vec())),
            _ => Err(InterpretationError::LabelConflict { tuple: t.to_vec(), letters: hits }),
        }
    }

    /// Compiled label formulas, checked against `m`.
    pub fn compiled_labels(&self, m: &WordStructure) -> Result<Vec<(char, CompiledFormula)>, InterpretationError> {
        let xs = indexed_vars("x", self.k);
        let mut out = Vec::new();
        for (c, f) in &self.labels {
            let cf = CompiledFormula::new(f, &xs);
            cf.check_model(m, &EvalConfig::default())?;
            out.push((*c, cf));
        }
        Ok(out)
    }
}

/// All `k`-tuples over `1..=n` in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return if k == 0 { vec![vec![]] } else { out };
    }
    let mut t = vec![1; k];
    loop {
        out.push(t.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if t[i] < n {
                t[i] += 1;
                break;
            }
            t[i] = 1;
        }
    }
}

/// Relation matrix of the reflexive order on `tuples`.
fn order_matrix(i: &Interpretation, m: &WordStructure, tuples: &[Vec<usize>]) -> Result<Vec<Vec<bool>>, InterpretationError> {
    let mut params = indexed_vars("x", i.k);
    params.extend(indexed_vars("y", i.k));
    let f = match &i.order {
        OutputOrder::Order(_) => CompiledFormula::new(&i.reflexive_order(), &params),
        OutputOrder::Successor(f) => CompiledFormula::new(f, &params),
    };
    f.check_model(m, &EvalConfig::default())?;
    let mut args = vec![0; 2 * i.k];
    Ok(tuples
        .iter()
        .map(|a| {
            tuples
                .iter()
                .map(|b| {
                    args[..i.k].copy_from_slice(a);
                    args[i.k..].copy_from_slice(b);
                    f.eval_unchecked(m, &args)
                })
                .collect()
        })
        .collect())
}

/// Checks a reflexive relation matrix for linearity; on success returns the
/// indices sorted from least to greatest.
pub fn linearize(rel: &[Vec<bool>], tuples: &[Vec<usize>]) -> Result<Vec<usize>, OrderViolation> {
    let n = rel.len();
    for a in 0..n {
        for b in a + 1..n {
            match (rel[a][b], rel[b][a]) {
                (false, false) => return Err(OrderViolation::NotTotal { a: tuples[a].clone(), b: tuples[b].clone() }),
                (true, true) => {
                    return Err(OrderViolation::NotAntisymmetric { a: tuples[a].clone(), b: tuples[b].clone() })
                }
                _ => {}
            }
        }
    }
    // a tournament is transitive iff a before b always means a has more successors
    let score: Vec<usize> = (0..n).map(|a| (0..n).filter(|&b| b != a && rel[a][b]).count()).collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && rel[a][b] && score[a] <= score[b] {
                let c = (0..n)
                    .find(|&c| c != a && c != b && rel[b][c] && !rel[a][c])
                    .expect("a score inversion yields a cycle");
                return Err(OrderViolation::NotTransitive {
                    a: tuples[a].clone(),
                    b: tuples[b].clone(),
                    c: tuples[c].clone(),
                });
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&a| std::cmp::Reverse(score[a]));
    Ok(idx)
}

/// Orders `tuples` along a successor relation; it must form one path.
fn follow_successor(rel: &[Vec<bool>], tuples: &[Vec<usize>]) -> Result<Vec<usize>, OrderViolation> {
    let n = rel.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let bad = |detail: String| Err(OrderViolation::NotAPath { detail });
    let mut next = vec![None; n];
    let mut has_pred = vec![false; n];
    for a in 0..n {
        for b in 0..n {
            if rel[a][b] {
                if a == b {
                    return bad(format!("{:?} is its own successor", tuples[a]));
                }
                if next[a].is_some() {
                    return bad(format!("{:?} has two successors", tuples[a]));
                }
                if has_pred[b] {
                    return bad(format!("{:?} has two predecessors", tuples[b]));
                }
                next[a] = Some(b);
                has_pred[b] = true;
            }
        }
    }
    let starts: Vec<usize> = (0..n).filter(|&a| !has_pred[a]).collect();
    if starts.len() != 1 {
        return bad(format!("{} elements without predecessor", starts.len()));
    }
    let mut out = vec![starts[0]];
    while let Some(b) = next[*out.last().unwrap()] {
        out.push(b);
    }
    if out.len() != n {
        return bad(format!("path covers {} of {} elements", out.len(), n));
    }
    Ok(out)
}

/// Checks that the order formula linearly orders the universe of `w`.
pub fn validate_order(i: &Interpretation, w: &str) -> Result<OrderReport, InterpretationError> {
    let m = i.input_model(w)?;
    let tuples = i.universe_tuples(&m)?;
    let rel = order_matrix(i, &m, &tuples)?;
    let violation = match i.order {
        OutputOrder::Order(_) => linearize(&rel, &tuples).err(),
        OutputOrder::Successor(_) => follow_successor(&rel, &tuples).err(),
    };
    Ok(OrderReport { universe_size: tuples.len(), violation })
}

/// Evaluates by enumerating all tuples, filtering by the universe formula,
/// sorting by the order formula and labelling each tuple.
pub fn evaluate_interpretation(i: &Interpretation, w: &str) -> Result<Evaluation, InterpretationError> {
    let m = i.input_model(w)?;
    let tuples = i.universe_tuples(&m)?;
    let rel = order_matrix(i, &m, &tuples)?;
    let order = match i.order {
        OutputOrder::Order(_) => linearize(&rel, &tuples),
        OutputOrder::Successor(_) => follow_successor(&rel, &tuples),
    }
    .map_err(InterpretationError::InvalidOrder)?;
    let labels = i.compiled_labels(&m)?;
    let mut output = String::new();
    let mut sorted = Vec::with_capacity(order.len());
    for idx in order {
        output.push(i.label_of(&m, &labels, &tuples[idx])?);
        sorted.push(tuples[idx].clone());
    }
    Ok(Evaluation { output, tuples: sorted, below_threshold: m.size() < 2 })
}

/// First-order composition: the result computes `g` after `f`.
///
/// Each variable of `g` becomes a block of `k_f` variables, quantifiers of `g`
/// are restricted to the universe of `f`, and atoms of `g` are replaced by the
/// defining formulas of `f`.
pub fn compose_fo(f: &Interpretation, g: &Interpretation) -> Result<Interpretation, InterpretationError> {
    if f.flavor != Logic::Fo || g.flavor != Logic::Fo {
        return Err(InterpretationError::MsoComposition);
    }
    if f.is_successor() || g.is_successor() {
        return Err(InterpretationError::SuccessorComposition);
    }
    if !f.output_alphabet.iter().all(|c| g.input_alphabet.contains(c)) {
        return Err(InterpretationError::AlphabetMismatch(f.output_alphabet.clone(), g.input_alphabet.clone()));
    }
    let kf = f.k;
    let xs = indexed_vars("x", kf);
    let ys = indexed_vars("y", kf);
    let mut map = RelationMap::new();
    for (c, phi) in &f.labels {
        map.insert(c.to_string(), Template::unary(phi.clone()));
    }
    let strict = Formula::And(vec![f.order_formula().clone(), Formula::not(Formula::tuple_equal(&xs, &ys))]);
    map.insert("<".into(), Template::binary(strict.clone()));
    // y is the successor of x: x < y with no universe element strictly between
    let zs = indexed_vars("z", kf);
    let rename = |from: &[String], to: &[String]| -> std::collections::HashMap<String, String> {
        from.iter().cloned().zip(to.iter().cloned()).collect()
    };
    let between = Formula::And(vec![
        f.universe.rename_free(&rename(&xs, &zs)),
        strict.rename_free(&rename(&ys, &zs)),
        strict.rename_free(&rename(&xs, &zs)),
    ]);
    let between = zs.iter().rev().fold(between, |acc, z| Formula::exists(z, acc));
    map.insert("succ".into(), Template::binary(Formula::And(vec![strict, Formula::not(between)])));

    let name = move |v: &str, j: usize| -> String {
        let (prefix, idx) = v.split_at(1);
        match idx.parse::<usize>() {
            Ok(i) if prefix == "x" || prefix == "y" => format!("{prefix}{}", (i - 1) * kf + j),
            _ => format!("{v}_{j}"),
        }
    };
    let opts = Substitution { k: kf, universe: Some(&f.universe), free_name: &name };
    let k = kf * g.k;
    let mut universe = Vec::new();
    for i in 1..=g.k {
        let block: Vec<String> = (1..=kf).map(|j| name(&format!("x{i}"), j)).collect();
        universe.push(f.universe.rename_free(&rename(&xs, &block)));
    }
    universe.push(substitute_with(&g.universe, &map, &opts)?);
    let mut labels = BTreeMap::new();
    for (c, phi) in &g.labels {
        labels.insert(*c, substitute_with(phi, &map, &opts)?);
    }
    let order = substitute_with(g.order_formula(), &map, &opts)?;
    Interpretation::new(
        Logic::Fo,
        k,
        f.input_alphabet.clone(),
        g.output_alphabet.clone(),
        Formula::And(universe),
        labels,
        OutputOrder::Order(order),
    )
}

/// Convenience for tests and fixtures: parses formula sources directly.
pub fn interpretation_from_sources(
    flavor: Logic,
    k: usize,
    input_alphabet: &str,
    output_alphabet: &str,
    universe: &str,
    labels: &[(char, &str)],
    order: &str,
) -> Result<Interpretation, InterpretationError> {
    let parse = |field: &str, src: &str| {
        parse_formula_with(src, flavor).map_err(|source| InterpretationError::Parse { field: field.to_string(), source })
    };
    let mut ls = BTreeMap::new();
    for (c, src) in labels {
        ls.insert(*c, parse(&format!("labels.{c}"), src)?);
    }
    Interpretation::new(
        flavor,
        k,
        input_alphabet.chars().collect(),
        output_alphabet.chars().collect(),
        parse("universe", universe)?,
        ls,
        OutputOrder::Order(parse("order", order)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn revprefix() -> Interpretation {
        interpretation_from_sources(
            Logic::Fo,
            2,
            "ab",
            "ab",
            "(<= x2 x1)",
            &[('a', "(a x2)"), ('b', "(b x2)")],
            "(or (< x1 y1) (and (= x1 y1) (>= x2 y2)))",
        )
        .unwrap()
    }

    fn identity() -> Interpretation {
        interpretation_from_sources(Logic::Fo, 1, "ab", "ab", "true", &[('a', "(a x1)"), ('b', "(b x1)")], "(<= x1 y1)")
            .unwrap()
    }

    fn reverse() -> Interpretation {
        interpretation_from_sources(Logic::Fo, 1, "abc", "abc", "true", &[('a', "(a x1)"), ('b', "(b x1)"), ('c', "(c x1)")], "(>= x1 y1)")
            .unwrap()
    }

    #[test]
    fn reversed_prefixes() {
        let e = evaluate_interpretation(&revprefix(), "abbb").unwrap();
        assert_eq!(e.output, "ababbabbba");
        assert_eq!(e.tuples[..3], [vec![1, 1], vec![2, 2], vec![2, 1]]);
        assert!(!e.below_threshold);
        assert!(validate_order(&revprefix(), "abbb").unwrap().is_valid());
        assert!(evaluate_interpretation(&revprefix(), "a").unwrap().below_threshold);
    }

    #[test]
    fn identity_and_squaring() {
        assert_eq!(evaluate_interpretation(&identity(), "ab").unwrap().output, "ab");
        let sq = interpretation_from_sources(
            Logic::Fo,
            2,
            "ab",
            "ab",
            "true",
            &[('a', "(a x2)"), ('b', "(b x2)")],
            "(or (< x1 y1) (and (= x1 y1) (<= x2 y2)))",
        )
        .unwrap();
        assert_eq!(evaluate_interpretation(&sq, "ab").unwrap().output, "abab");
    }

    #[test]
    fn order_violations() {
        let mut partial = revprefix();
        partial.universe = Formula::True;
        partial.order = OutputOrder::Order(crate::logic::parse_formula("(< x1 y1)").unwrap());
        let r = validate_order(&partial, "ab").unwrap();
        assert!(matches!(r.violation, Some(OrderViolation::NotTotal { .. })));

        let mut neq = identity();
        neq.order = OutputOrder::Order(crate::logic::parse_formula("(!= x1 y1)").unwrap());
        let r = validate_order(&neq, "ab").unwrap();
        assert_eq!(r.violation, Some(OrderViolation::NotAntisymmetric { a: vec![1], b: vec![2] }));
    }

    #[test]
    fn label_conflicts_are_errors() {
        let mut i = identity();
        i.labels.insert('b', Formula::True);
        assert!(matches!(evaluate_interpretation(&i, "ab"), Err(InterpretationError::LabelConflict { .. })));
    }

    #[test]
    fn composition() {
        let id = compose_fo(&identity(), &identity()).unwrap();
        assert_eq!(evaluate_interpretation(&id, "ab").unwrap().output, "ab");
        let rr = compose_fo(&reverse(), &reverse()).unwrap();
        assert_eq!(evaluate_interpretation(&rr, "abc").unwrap().output, "abc");
        assert_eq!(compose_fo(&revprefix(), &revprefix()).unwrap().k, 4);
    }

    #[test]
    fn json_round_trip() {
        let i = revprefix();
        let back = Interpretation::from_json(&i.to_json().to_string()).unwrap();
        assert_eq!(back, i);
    }
}
