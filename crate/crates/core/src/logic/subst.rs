//! Substitution of defining formulas for atoms, with each variable expanded
//! into a tuple of fresh variables.
//!
//! A template for a unary relation has free variables `x1..xk`; a template
//! for a binary relation has `x1..xk, y1..yk`.

use super::{indexed_vars, Formula};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("no template for relation `{0}`")]
    MissingRelation(String),
    #[error("template for `{name}` has arity {found}, the atom needs {expected}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("template for `{name}` has free variable `{var}` outside its parameter list")]
    StrayVariable { name: String, var: String },
    #[error("set quantification cannot be expanded to dimension {0}")]
    SetsInHigherDimension(usize),
}

/// Generates names that do not clash with a reserved set.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    used: BTreeSet<String>,
}

impl NameSupply {
    pub fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        NameSupply { used: reserved.into_iter().collect() }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    /// A name starting with `base` that has not been handed out or reserved.
    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.trim_end_matches(|c: char| c == '_' || c.is_ascii_digit());
        let base = if base.is_empty() { "v" } else { base };
        let mut i = 1usize;
        loop {
            let cand = format!("{base}_{i}");
            if self.used.insert(cand.clone()) {
                return cand;
            }
            i += 1;
        }
    }

    /// Like [`NameSupply::fresh`] but returns `name` itself when unused.
    pub fn prefer(&mut self, name: &str) -> String {
        if self.used.insert(name.to_string()) {
            name.to_string()
        } else {
            self.fresh(name)
        }
    }
}

/// A defining formula for one relation of the intermediate vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub arity: usize,
    pub formula: Formula,
}

impl Template {
    pub fn unary(formula: Formula) -> Self {
        Template { arity: 1, formula }
    }

    pub fn binary(formula: Formula) -> Self {
        Template { arity: 2, formula }
    }
}

/// Relation names are single letters for labels, and `<`, `=`, `succ`,
/// `block<` for the binary relations. Without an entry for `=`, equality is
/// expanded componentwise.
pub type RelationMap = HashMap<String, Template>;

/// Options for [`substitute_with`].
pub struct Substitution<'a> {
    pub k: usize,
    /// Every expanded quantifier is restricted to tuples satisfying this
    /// formula (over `x1..xk`).
    pub universe: Option<&'a Formula>,
    /// Names of the expansion of a free variable: `(var, j)` for `j in 1..=k`.
    pub free_name: &'a dyn Fn(&str, usize) -> String,
}

fn default_name(v: &str, j: usize, k: usize) -> String {
    if k == 1 {
        v.to_string()
    } else if v.ends_with(|c: char| c.is_ascii_digit()) {
        format!("{v}_{j}")
    } else {
        format!("{v}{j}")
    }
}

/// Substitutes templates into `f`, expanding every variable `v` into
/// `v1..vk` (or `v` itself when `k = 1`).
pub fn substitute(f: &Formula, map: &RelationMap, k: usize) -> Result<Formula, SubstError> {
    let name = move |v: &str, j: usize| default_name(v, j, k);
    substitute_with(f, map, &Substitution { k, universe: None, free_name: &name })
}

pub fn substitute_with(f: &Formula, map: &RelationMap, opts: &Substitution<'_>) -> Result<Formula, SubstError> {
    let k = opts.k;
    assert!(k >= 1, "dimension must be positive");
    if k > 1 && f.is_mso() {
        return Err(SubstError::SetsInHigherDimension(k));
    }
    for (name, t) in map {
        let expected = if name.chars().count() == 1 && !matches!(name.as_str(), "<" | "=") { 1 } else { 2 };
        if t.arity != expected {
            return Err(SubstError::ArityMismatch { name: name.clone(), expected, found: t.arity });
        }
        let mut allowed: BTreeSet<String> = indexed_vars("x", k).into_iter().collect();
        if t.arity == 2 {
            allowed.extend(indexed_vars("y", k));
        }
        if let Some(var) = t.formula.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(SubstError::StrayVariable { name: name.clone(), var });
        }
    }
    let mut env: HashMap<String, Vec<String>> = HashMap::new();
    let mut reserved: BTreeSet<String> = f.all_names();
    for v in f.free_vars() {
        let names: Vec<String> = (1..=k).map(|j| (opts.free_name)(&v, j)).collect();
        reserved.extend(names.iter().cloned());
        env.insert(v, names);
    }
    for t in map.values() {
        reserved.extend(t.formula.all_names());
    }
    if let Some(u) = opts.universe {
        reserved.extend(u.all_names());
    }
    let mut s = Subst { map, k, universe: opts.universe, supply: NameSupply::new(reserved) };
    s.go(f, &mut env)
}

struct Subst<'a> {
    map: &'a RelationMap,
    k: usize,
    universe: Option<&'a Formula>,
    supply: NameSupply,
}

impl Subst<'_> {
    fn instantiate(&mut self, name: &str, args: &[&Vec<String>]) -> Result<Formula, SubstError> {
        let t = match self.map.get(name) {
            Some(t) => t,
            None if name == "=" => {
                return Ok(Formula::tuple_equal(args[0], args[1]));
            }
            None => return Err(SubstError::MissingRelation(name.to_string())),
        };
        if t.arity != args.len() {
            return Err(SubstError::ArityMismatch { name: name.to_string(), expected: args.len(), found: t.arity });
        }
        Ok(self.apply(&t.formula, args))
    }

    fn apply(&mut self, template: &Formula, args: &[&Vec<String>]) -> Formula {
        let mut rename = HashMap::new();
        for (prefix, names) in ["x", "y"].iter().zip(args) {
            for (j, n) in names.iter().enumerate() {
                rename.insert(format!("{prefix}{}", j + 1), n.clone());
            }
        }
        template.freshen_bound(&mut self.supply).rename_free(&rename)
    }

    fn go(&mut self, f: &Formula, env: &mut HashMap<String, Vec<String>>) -> Result<Formula, SubstError> {
        let get = |env: &HashMap<String, Vec<String>>, v: &str| env.get(v).cloned().expect("variable expanded");
        Ok(match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Label(c, v) => {
                let a = get(env, v);
                self.instantiate(&c.to_string(), &[&a])?
            }
            Formula::Less(v, w) | Formula::Equal(v, w) | Formula::BlockLess(v, w) | Formula::Succ(v, w) => {
                let name = match f {
                    Formula::Less(..) => "<",
                    Formula::Equal(..) => "=",
                    Formula::BlockLess(..) => "block<",
                    _ => "succ",
                };
                let (a, b) = (get(env, v), get(env, w));
                self.instantiate(name, &[&a, &b])?
            }
            Formula::CoordLess(..) | Formula::CoordEqual(..) => {
                return Err(SubstError::MissingRelation(f.to_string()));
            }
            Formula::In(v, set) => Formula::In(get(env, v)[0].clone(), set.clone()),
            Formula::Not(g) => Formula::not(self.go(g, env)?),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| self.go(g, env)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| self.go(g, env)).collect::<Result<_, _>>()?),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let names: Vec<String> = if self.k == 1 {
                    vec![self.supply.fresh(v)]
                } else {
                    (1..=self.k).map(|j| self.supply.fresh(&format!("{v}{j}"))).collect()
                };
                let saved = env.insert(v.clone(), names.clone());
                let body = self.go(g, env)?;
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                let exists = matches!(f, Formula::Exists(..));
                let body = match self.universe {
                    None => body,
                    Some(u) => {
                        let guard = self.apply(u, &[&names]);
                        if exists {
                            Formula::And(vec![guard, body])
                        } else {
                            Formula::Or(vec![Formula::not(guard), body])
                        }
                    }
                };
                names.into_iter().rev().fold(body, |acc, n| {
                    if exists {
                        Formula::Exists(n, Box::new(acc))
                    } else {
                        Formula::Forall(n, Box::new(acc))
                    }
                })
            }
            Formula::ExistsSet(v, g) => Formula::ExistsSet(v.clone(), Box::new(self.go(g, env)?)),
            Formula::ForallSet(v, g) => Formula::ForallSet(v.clone(), Box::new(self.go(g, env)?)),
        })
    }
}
