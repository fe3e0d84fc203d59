use super::{Coord, Formula};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Relations a model may or may not interpret.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Order,
    Successor,
    Block,
    Coordinates,
    Labels,
}

/// A finite structure over positions `1..=size()`.
pub trait Model {
    fn size(&self) -> usize;
    fn supports(&self, rel: Relation) -> bool;
    fn label(&self, pos: usize) -> Option<char>;
    fn less(&self, a: usize, b: usize) -> bool;
    fn succ(&self, a: usize, b: usize) -> bool;
    fn block_less(&self, _a: usize, _b: usize) -> bool {
        false
    }
    /// Compares coordinate `c.left` of factor `c.factor` in `a` with
    /// coordinate `c.right` of the same factor in `b`.
    fn coord_cmp(&self, _c: Coord, _a: usize, _b: usize) -> Option<Ordering> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("free variable `{0}` is not assigned")]
    Uncovered(String),
    #[error("position {pos} of `{var}` is outside the universe 1..={size}")]
    OutOfRange { var: String, pos: usize, size: usize },
    #[error("the structure does not interpret {0:?}")]
    Unsupported(Relation),
    #[error("coordinate {0} is not available in this structure")]
    BadCoordinate(Coord),
    #[error("set quantification over {size} positions exceeds the cap of {cap}")]
    SubsetCapExceeded { size: usize, cap: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    /// Largest universe over which set quantifiers are enumerated exhaustively.
    pub subset_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { subset_cap: 18 }
    }
}

/// Values for free variables: positions (1-based) and position sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub positions: BTreeMap<String, usize>,
    pub sets: BTreeMap<String, BTreeSet<usize>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, pos: usize) -> Self {
        self.positions.insert(var.to_string(), pos);
        self
    }

    pub fn with_set(mut self, var: &str, set: impl IntoIterator<Item = usize>) -> Self {
        self.sets.insert(var.to_string(), set.into_iter().collect());
        self
    }
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Label(char, usize),
    Less(usize, usize),
    Equal(usize, usize),
    Block(usize, usize),
    Succ(usize, usize),
    In(usize, usize),
    CoordLess(Coord, usize, usize),
    CoordEqual(Coord, usize, usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
    ExistsSet(usize, Box<Node>),
    ForallSet(usize, Box<Node>),
}

/// A formula with variables resolved to slots, for repeated evaluation.
///
/// The first `params.len()` first-order slots are the parameters given to
/// [`CompiledFormula::new`]; further free variables, if any, must come from an
/// [`Assignment`] via [`CompiledFormula::eval_assignment`].
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    root: Node,
    params: Vec<String>,
    extra_free: Vec<(String, usize)>,
    free_sets: Vec<String>,
    slots: usize,
    set_slots: usize,
    relations: BTreeSet<Relation>,
    has_sets: bool,
    coords: Vec<Coord>,
}

struct Compiler {
    scope: HashMap<String, Vec<usize>>,
    set_scope: HashMap<String, Vec<usize>>,
    slots: usize,
    set_slots: usize,
    extra_free: Vec<(String, usize)>,
    free_sets: Vec<String>,
    relations: BTreeSet<Relation>,
    coords: Vec<Coord>,
}

impl Compiler {
    fn var(&mut self, v: &str) -> usize {
        if let Some(s) = self.scope.get(v).and_then(|s| s.last()) {
            return *s;
        }
        let slot = self.slots;
        self.slots += 1;
        self.scope.insert(v.to_string(), vec![slot]);
        self.extra_free.push((v.to_string(), slot));
        slot
    }

    fn set_var(&mut self, v: &str) -> usize {
        if let Some(s) = self.set_scope.get(v).and_then(|s| s.last()) {
            return *s;
        }
        let slot = self.set_slots;
        self.set_slots += 1;
        self.set_scope.insert(v.to_string(), vec![slot]);
        self.free_sets.push(v.to_string());
        slot
    }

    fn bind(&mut self, v: &str, sets: bool) -> usize {
        let (scope, counter) = if sets {
            (&mut self.set_scope, &mut self.set_slots)
        } else {
            (&mut self.scope, &mut self.slots)
        };
        let slot = *counter;
        *counter += 1;
        scope.entry(v.to_string()).or_default().push(slot);
        slot
    }

    fn unbind(&mut self, v: &str, sets: bool) {
        let scope = if sets { &mut self.set_scope } else { &mut self.scope };
        if let Some(s) = scope.get_mut(v) {
            s.pop();
        }
    }

    fn compile(&mut self, f: &Formula) -> Node {
        match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Label(c, v) => {
                self.relations.insert(Relation::Labels);
                Node::Label(*c, self.var(v))
            }
            Formula::Less(v, w) => {
                self.relations.insert(Relation::Order);
                Node::Less(self.var(v), self.var(w))
            }
            Formula::Equal(v, w) => Node::Equal(self.var(v), self.var(w)),
            Formula::BlockLess(v, w) => {
                self.relations.insert(Relation::Block);
                Node::Block(self.var(v), self.var(w))
            }
            Formula::Succ(v, w) => {
                self.relations.insert(Relation::Successor);
                Node::Succ(self.var(v), self.var(w))
            }
            Formula::In(v, s) => Node::In(self.var(v), self.set_var(s)),
            Formula::CoordLess(c, v, w) | Formula::CoordEqual(c, v, w) => {
                self.relations.insert(Relation::Coordinates);
                self.coords.push(*c);
                let (a, b) = (self.var(v), self.var(w));
                if matches!(f, Formula::CoordLess(..)) {
                    Node::CoordLess(*c, a, b)
                } else {
                    Node::CoordEqual(*c, a, b)
                }
            }
            Formula::Not(g) => Node::Not(Box::new(self.compile(g))),
            Formula::And(gs) => Node::And(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Or(gs) => Node::Or(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.bind(v, false);
                let body = Box::new(self.compile(g));
                self.unbind(v, false);
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::Forall(slot, body)
                }
            }
            Formula::ExistsSet(v, g) | Formula::ForallSet(v, g) => {
                let slot = self.bind(v, true);
                let body = Box::new(self.compile(g));
                self.unbind(v, true);
                if matches!(f, Formula::ExistsSet(..)) {
                    Node::ExistsSet(slot, body)
                } else {
                    Node::ForallSet(slot, body)
                }
            }
        }
    }
}

impl CompiledFormula {
    pub fn new(f: &Formula, params: &[String]) -> Self {
        let mut c = Compiler {
            scope: HashMap::new(),
            set_scope: HashMap::new(),
            slots: params.len(),
            set_slots: 0,
            extra_free: Vec::new(),
            free_sets: Vec::new(),
            relations: BTreeSet::new(),
            coords: Vec::new(),
        };
        for (i, p) in params.iter().enumerate() {
            c.scope.insert(p.clone(), vec![i]);
        }
        let root = c.compile(f);
        CompiledFormula {
            root,
            params: params.to_vec(),
            extra_free: c.extra_free,
            free_sets: c.free_sets,
            slots: c.slots,
            set_slots: c.set_slots,
            relations: c.relations,
            has_sets: f.is_mso(),
            coords: c.coords,
        }
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Relations the formula mentions.
    pub fn relations(&self) -> &BTreeSet<Relation> {
        &self.relations
    }

    /// Checks once that `m` can evaluate this formula.
    pub fn check_model<M: Model + ?Sized>(&self, m: &M, cfg: &EvalConfig) -> Result<(), EvalError> {
        for r in &self.relations {
            if !m.supports(*r) {
                return Err(EvalError::Unsupported(*r));
            }
        }
        if self.relations.contains(&Relation::Coordinates) && m.size() > 0 {
            for c in &self.coords {
                if m.coord_cmp(*c, 1, 1).is_none() {
                    return Err(EvalError::BadCoordinate(*c));
                }
            }
        }
        if self.has_sets && m.size() > cfg.subset_cap.min(63) {
            return Err(EvalError::SubsetCapExceeded { size: m.size(), cap: cfg.subset_cap.min(63) });
        }
        Ok(())
    }

    /// Evaluates with the parameters bound to `args`. Any other free variable
    /// is reported as uncovered.
    pub fn eval<M: Model + ?Sized>(&self, m: &M, args: &[usize]) -> Result<bool, EvalError> {
        self.eval_cfg(m, args, &EvalConfig::default())
    }

    pub fn eval_cfg<M: Model + ?Sized>(&self, m: &M, args: &[usize], cfg: &EvalConfig) -> Result<bool, EvalError> {
        if let Some((v, _)) = self.extra_free.first() {
            return Err(EvalError::Uncovered(v.clone()));
        }
        if let Some(v) = self.free_sets.first() {
            return Err(EvalError::Uncovered(v.clone()));
        }
        self.check_model(m, cfg)?;
        self.check_args(m, args)?;
        Ok(self.eval_unchecked(m, args))
    }

    fn check_args<M: Model + ?Sized>(&self, m: &M, args: &[usize]) -> Result<(), EvalError> {
        assert_eq!(args.len(), self.params.len(), "argument count does not match parameters");
        for (v, &p) in self.params.iter().zip(args) {
            if p == 0 || p > m.size() {
                return Err(EvalError::OutOfRange { var: v.clone(), pos: p, size: m.size() });
            }
        }
        Ok(())
    }

    /// Evaluation without model checks; call [`CompiledFormula::check_model`]
    /// once beforehand. Panics on unsupported relations.
    pub fn eval_unchecked<M: Model + ?Sized>(&self, m: &M, args: &[usize]) -> bool {
        let mut env = vec![0usize; self.slots];
        env[..args.len()].copy_from_slice(args);
        let mut sets = vec![0u64; self.set_slots];
        run(&self.root, m, &mut env, &mut sets)
    }

    /// Evaluates with free variables taken from an assignment by name.
    pub fn eval_assignment<M: Model + ?Sized>(&self, m: &M, a: &Assignment, cfg: &EvalConfig) -> Result<bool, EvalError> {
        self.check_model(m, cfg)?;
        let mut env = vec![0usize; self.slots];
        let names = self.params.iter().enumerate().chain(self.extra_free.iter().map(|(v, slot)| (*slot, v)));
        for (slot, v) in names {
            let p = *a.positions.get(v).ok_or_else(|| EvalError::Uncovered(v.clone()))?;
            if p == 0 || p > m.size() {
                return Err(EvalError::OutOfRange { var: v.clone(), pos: p, size: m.size() });
            }
            env[slot] = p;
        }
        let mut sets = vec![0u64; self.set_slots];
        for (slot, v) in self.free_sets.iter().enumerate() {
            let s = a.sets.get(v).ok_or_else(|| EvalError::Uncovered(v.clone()))?;
            let mut mask = 0u64;
            for &p in s {
                if p == 0 || p > m.size() || p > 64 {
                    return Err(EvalError::OutOfRange { var: v.clone(), pos: p, size: m.size() });
                }
                mask |= 1 << (p - 1);
            }
            sets[slot] = mask;
        }
        Ok(run(&self.root, m, &mut env, &mut sets))
    }
}

fn run<M: Model + ?Sized>(n: &Node, m: &M, env: &mut [usize], sets: &mut [u64]) -> bool {
    match n {
        Node::True => true,
        Node::False => false,
        Node::Label(c, v) => m.label(env[*v]) == Some(*c),
        Node::Less(v, w) => m.less(env[*v], env[*w]),
        Node::Equal(v, w) => env[*v] == env[*w],
        Node::Block(v, w) => m.block_less(env[*v], env[*w]),
        Node::Succ(v, w) => m.succ(env[*v], env[*w]),
        Node::In(v, s) => sets[*s] >> (env[*v] - 1) & 1 == 1,
        Node::CoordLess(c, v, w) => m.coord_cmp(*c, env[*v], env[*w]) == Some(Ordering::Less),
        Node::CoordEqual(c, v, w) => m.coord_cmp(*c, env[*v], env[*w]) == Some(Ordering::Equal),
        Node::Not(g) => !run(g, m, env, sets),
        Node::And(gs) => gs.iter().all(|g| run(g, m, env, sets)),
        Node::Or(gs) => gs.iter().any(|g| run(g, m, env, sets)),
        Node::Exists(v, g) => (1..=m.size()).any(|p| {
            env[*v] = p;
            run(g, m, env, sets)
        }),
        Node::Forall(v, g) => (1..=m.size()).all(|p| {
            env[*v] = p;
            run(g, m, env, sets)
        }),
        Node::ExistsSet(s, g) => (0..1u64 << m.size()).any(|mask| {
            sets[*s] = mask;
            run(g, m, env, sets)
        }),
        Node::ForallSet(s, g) => (0..1u64 << m.size()).all(|mask| {
            sets[*s] = mask;
            run(g, m, env, sets)
        }),
    }
}

/// Evaluates `f` under `a` with the default configuration.
pub fn eval<M: Model + ?Sized>(f: &Formula, m: &M, a: &Assignment) -> Result<bool, EvalError> {
    eval_with(f, m, a, &EvalConfig::default())
}

pub fn eval_with<M: Model + ?Sized>(f: &Formula, m: &M, a: &Assignment, cfg: &EvalConfig) -> Result<bool, EvalError> {
    CompiledFormula::new(f, &[]).eval_assignment(m, a, cfg)
}
