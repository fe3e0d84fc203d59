//! First-order and monadic second-order formulas over word vocabularies.
//!
//! Formulas are written as s-expressions (see [`parse_formula`]) and evaluated
//! over any [`Model`]: ordered or successor word models, words with a block
//! order, and direct products of linear orders.

mod eval;
mod parse;
mod subst;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use eval::{eval, eval_with, Assignment, CompiledFormula, EvalConfig, EvalError, Model, Relation};
pub use parse::{parse_formula, parse_formula_with, ParseError};
pub use subst::{substitute, substitute_with, NameSupply, RelationMap, SubstError, Substitution, Template};

/// Which logic a formula (or an interpretation) is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Fo,
    Mso,
}

/// A coordinate comparison in a direct product of powers of linear orders:
/// compares `x[factor][left]` with `y[factor][right]` (all 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub factor: usize,
    pub left: usize,
    pub right: usize,
}

impl Coord {
    pub fn new(factor: usize) -> Self {
        Coord { factor, left: 1, right: 1 }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.left == 1 && self.right == 1 {
            write!(f, "{}", self.factor)
        } else {
            write!(f, "{}.{}.{}", self.factor, self.left, self.right)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `(a x)`: position `x` carries letter `a`.
    Label(char, String),
    Less(String, String),
    Equal(String, String),
    /// `(block< x y)`: `x` lies in an earlier block than `y`.
    BlockLess(String, String),
    Succ(String, String),
    /// `(in x X)`: set membership.
    In(String, String),
    CoordLess(Coord, String, String),
    CoordEqual(Coord, String, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

impl Formula {
    pub fn label(letter: char, v: &str) -> Self {
        Formula::Label(letter, v.to_string())
    }

    pub fn less(v: &str, w: &str) -> Self {
        Formula::Less(v.to_string(), w.to_string())
    }

    pub fn equal(v: &str, w: &str) -> Self {
        Formula::Equal(v.to_string(), w.to_string())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    /// Maximum nesting depth of quantifiers, first-order and set quantifiers alike.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0)
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::ExistsSet(_, f)
            | Formula::ForallSet(_, f) => 1 + f.quantifier_rank(),
            _ => 0,
        }
    }

    /// True if the formula uses set quantifiers or set membership.
    pub fn is_mso(&self) -> bool {
        match self {
            Formula::In(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => true,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.is_mso(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::is_mso),
            _ => false,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    /// Free first-order variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, false);
        out
    }

    /// Free set variables.
    pub fn free_set_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, true);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>, sets: bool) {
        let note = |v: &'a str, bound: &Vec<&'a str>, out: &mut BTreeSet<String>| {
            if !bound.contains(&v) {
                out.insert(v.to_string());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Label(_, v) => {
                if !sets {
                    note(v, bound, out)
                }
            }
            Formula::Less(v, w)
            | Formula::Equal(v, w)
            | Formula::BlockLess(v, w)
            | Formula::Succ(v, w)
            | Formula::CoordLess(_, v, w)
            | Formula::CoordEqual(_, v, w) => {
                if !sets {
                    note(v, bound, out);
                    note(w, bound, out);
                }
            }
            Formula::In(v, set) => {
                if sets {
                    note(set, bound, out)
                } else {
                    note(v, bound, out)
                }
            }
            Formula::Not(f) => f.collect_free(bound, out, sets),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out, sets);
                }
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                if sets {
                    f.collect_free(bound, out, sets);
                } else {
                    bound.push(v);
                    f.collect_free(bound, out, sets);
                    bound.pop();
                }
            }
            Formula::ExistsSet(v, f) | Formula::ForallSet(v, f) => {
                if sets {
                    bound.push(v);
                    f.collect_free(bound, out, sets);
                    bound.pop();
                } else {
                    f.collect_free(bound, out, sets);
                }
            }
        }
    }

    /// Every variable name occurring in the formula, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut |n| {
            out.insert(n.to_string());
        });
        out
    }

    fn visit_names(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Label(_, v) => f(v),
            Formula::Less(v, w)
            | Formula::Equal(v, w)
            | Formula::BlockLess(v, w)
            | Formula::Succ(v, w)
            | Formula::In(v, w)
            | Formula::CoordLess(_, v, w)
            | Formula::CoordEqual(_, v, w) => {
                f(v);
                f(w);
            }
            Formula::Not(g) => g.visit_names(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_names(f)),
            Formula::Exists(v, g)
            | Formula::Forall(v, g)
            | Formula::ExistsSet(v, g)
            | Formula::ForallSet(v, g) => {
                f(v);
                g.visit_names(f);
            }
        }
    }

    /// Letters used in label atoms.
    pub fn letters(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if let Formula::Label(c, _) = a {
                out.insert(*c);
            }
        });
        out
    }

    pub(crate) fn visit_atoms(&self, f: &mut impl FnMut(&Formula)) {
        match self {
            Formula::Not(g)
            | Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::ExistsSet(_, g)
            | Formula::ForallSet(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            atom => f(atom),
        }
    }

    /// Renames free first-order variables. Bound variables that would capture a
    /// new name are renamed first.
    pub fn rename_free(&self, map: &HashMap<String, String>) -> Formula {
        let mut supply = NameSupply::new(self.all_names().into_iter().chain(map.values().cloned()));
        self.rename_inner(map, &mut supply)
    }

    fn rename_inner(&self, map: &HashMap<String, String>, supply: &mut NameSupply) -> Formula {
        let r = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Label(c, v) => Formula::Label(*c, r(v)),
            Formula::Less(v, w) => Formula::Less(r(v), r(w)),
            Formula::Equal(v, w) => Formula::Equal(r(v), r(w)),
            Formula::BlockLess(v, w) => Formula::BlockLess(r(v), r(w)),
            Formula::Succ(v, w) => Formula::Succ(r(v), r(w)),
            Formula::In(v, set) => Formula::In(r(v), set.clone()),
            Formula::CoordLess(c, v, w) => Formula::CoordLess(*c, r(v), r(w)),
            Formula::CoordEqual(c, v, w) => Formula::CoordEqual(*c, r(v), r(w)),
            Formula::Not(f) => Formula::not(f.rename_inner(map, supply)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_inner(map, supply)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_inner(map, supply)).collect()),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut inner = map.clone();
                inner.remove(v);
                let captured = inner.values().any(|n| n == v);
                let name = if captured {
                    let fresh = supply.fresh(v);
                    inner.insert(v.clone(), fresh.clone());
                    fresh
                } else {
                    v.clone()
                };
                let body = Box::new(f.rename_inner(&inner, supply));
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(name, body)
                } else {
                    Formula::Forall(name, body)
                }
            }
            Formula::ExistsSet(v, f) => Formula::ExistsSet(v.clone(), Box::new(f.rename_inner(map, supply))),
            Formula::ForallSet(v, f) => Formula::ForallSet(v.clone(), Box::new(f.rename_inner(map, supply))),
        }
    }

    /// Renames every bound first-order variable to a fresh name from `supply`.
    pub fn freshen_bound(&self, supply: &mut NameSupply) -> Formula {
        self.freshen_inner(&HashMap::new(), supply)
    }

    fn freshen_inner(&self, map: &HashMap<String, String>, supply: &mut NameSupply) -> Formula {
        match self {
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let fresh = supply.fresh(v);
                let mut inner = map.clone();
                inner.insert(v.clone(), fresh.clone());
                let body = Box::new(f.freshen_inner(&inner, supply));
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(fresh, body)
                } else {
                    Formula::Forall(fresh, body)
                }
            }
            Formula::Not(f) => Formula::not(f.freshen_inner(map, supply)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.freshen_inner(map, supply)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.freshen_inner(map, supply)).collect()),
            Formula::ExistsSet(v, f) => Formula::ExistsSet(v.clone(), Box::new(f.freshen_inner(map, supply))),
            Formula::ForallSet(v, f) => Formula::ForallSet(v.clone(), Box::new(f.freshen_inner(map, supply))),
            atom => atom.rename_inner(map, &mut NameSupply::new(std::iter::empty())),
        }
    }

    /// Componentwise equality of two equally long variable lists.
    pub fn tuple_equal(xs: &[String], ys: &[String]) -> Formula {
        debug_assert_eq!(xs.len(), ys.len());
        let mut parts: Vec<Formula> =
            xs.iter().zip(ys).map(|(x, y)| Formula::Equal(x.clone(), y.clone())).collect();
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }
}

/// Variable names `prefix1 .. prefixk`.
pub fn indexed_vars(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Label(c, v) => write!(f, "({c} {v})"),
            Formula::Less(v, w) => write!(f, "(< {v} {w})"),
            Formula::Equal(v, w) => write!(f, "(= {v} {w})"),
            Formula::BlockLess(v, w) => write!(f, "(block< {v} {w})"),
            Formula::Succ(v, w) => write!(f, "(succ {v} {w})"),
            Formula::In(v, s) => write!(f, "(in {v} {s})"),
            Formula::CoordLess(c, v, w) => write!(f, "(<@{c} {v} {w})"),
            Formula::CoordEqual(c, v, w) => write!(f, "(=@{c} {v} {w})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                write!(f, "({}", if matches!(self, Formula::And(_)) { "and" } else { "or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
            Formula::ExistsSet(v, g) => write!(f, "(existsS {v} {g})"),
            Formula::ForallSet(v, g) => write!(f, "(forallS {v} {g})"),
        }
    }
}
