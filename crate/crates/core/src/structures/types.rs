//! Rank-r types as interned back-and-forth trees.
//!
//! The rank-0 type of a tuple is its atomic signature. The rank-(r+1) type is
//! the rank-0 type together with the set of rank-r types of all one-element
//! extensions. Two (structure, tuple) pairs get the same rank-r type exactly
//! when Duplicator wins the r-round Ehrenfeucht–Fraïssé game on them, so
//! comparing interned ids decides the game.

use super::Typed;
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("type computation exceeded the budget of {0} game positions")]
pub struct BudgetExceeded(pub usize);

/// A rank-r type, valid within the interner that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct TypeId {
    pub rank: usize,
    pub id: u32,
}

#[derive(Default, Debug)]
pub struct TypeInterner {
    atomic: HashMap<Vec<u32>, u32>,
    table: HashMap<(u32, Vec<u32>), u32>,
    next: u32,
}

impl TypeInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct types interned so far (all ranks).
    pub fn len(&self) -> usize {
        self.next as usize
    }

    pub fn is_empty(&self) -> bool {
        self.next == 0
    }

    fn intern_atomic(&mut self, sig: Vec<u32>) -> u32 {
        let next = &mut self.next;
        *self.atomic.entry(sig).or_insert_with(|| {
            *next += 1;
            *next - 1
        })
    }

    fn intern_node(&mut self, atomic: u32, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        children.dedup();
        let next = &mut self.next;
        *self.table.entry((atomic, children)).or_insert_with(|| {
            *next += 1;
            *next - 1
        })
    }

    /// The rank-`rank` type of `tuple` in the context's structure.
    pub fn type_of<M: Typed + ?Sized>(
        &mut self,
        ctx: &mut TypeContext<'_, M>,
        tuple: &[usize],
        rank: usize,
    ) -> Result<TypeId, BudgetExceeded> {
        let id = self.compute(ctx, &mut tuple.to_vec(), rank)?;
        Ok(TypeId { rank, id })
    }

    fn compute<M: Typed + ?Sized>(
        &mut self,
        ctx: &mut TypeContext<'_, M>,
        tuple: &mut Vec<usize>,
        rank: usize,
    ) -> Result<u32, BudgetExceeded> {
        if let Some(&id) = ctx.memo.get(&(tuple.clone(), rank)) {
            return Ok(id);
        }
        ctx.nodes += 1;
        if ctx.nodes > ctx.budget {
            return Err(BudgetExceeded(ctx.budget));
        }
        let atomic = match ctx.memo.get(&(tuple.clone(), 0)) {
            Some(&id) => id,
            None => {
                let mut sig = Vec::new();
                ctx.model.atomic_signature(tuple, &mut sig);
                sig.push(tuple.len() as u32);
                let id = self.intern_atomic(sig);
                ctx.memo.insert((tuple.clone(), 0), id);
                id
            }
        };
        if rank == 0 {
            return Ok(atomic);
        }
        let mut children = Vec::with_capacity(ctx.model.size());
        for p in 1..=ctx.model.size() {
            tuple.push(p);
            let child = self.compute(ctx, tuple, rank - 1);
            tuple.pop();
            children.push(child?);
        }
        let id = self.intern_node(atomic, children);
        ctx.memo.insert((tuple.clone(), rank), id);
        Ok(id)
    }
}

/// Per-structure memo of computed types.
pub struct TypeContext<'m, M: ?Sized> {
    model: &'m M,
    memo: HashMap<(Vec<usize>, usize), u32>,
    nodes: usize,
    budget: usize,
}

impl<'m, M: Typed + ?Sized> TypeContext<'m, M> {
    /// A context with the budget from `POLYREG_BUDGET`, or [`DEFAULT_BUDGET`].
    pub fn new(model: &'m M) -> Self {
        Self::with_budget(model, budget_from_env())
    }

    pub fn with_budget(model: &'m M, budget: usize) -> Self {
        TypeContext { model, memo: HashMap::new(), nodes: 0, budget }
    }

    pub fn model(&self) -> &'m M {
        self.model
    }
}

pub(crate) fn budget_from_env() -> usize {
    std::env::var("POLYREG_BUDGET").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

static GLOBAL: LazyLock<Mutex<TypeInterner>> = LazyLock::new(|| Mutex::new(TypeInterner::new()));

/// The rank-`rank` type of `tuple` in `s`, named in a process-wide interner.
pub fn rank_type_id<M: Typed + ?Sized>(s: &M, tuple: &[usize], rank: usize) -> Result<TypeId, BudgetExceeded> {
    let mut ctx = TypeContext::new(s);
    let mut interner = GLOBAL.lock().unwrap_or_else(|e| e.into_inner());
    interner.type_of(&mut ctx, tuple, rank)
}

/// Whether Duplicator wins the `rank`-round game on `(s1, t1)` and `(s2, t2)`.
pub fn ef_equivalent<A: Typed + ?Sized, B: Typed + ?Sized>(
    s1: &A,
    t1: &[usize],
    s2: &B,
    t2: &[usize],
    rank: usize,
) -> Result<bool, BudgetExceeded> {
    assert_eq!(t1.len(), t2.len(), "tuples of different arity");
    let mut interner = TypeInterner::new();
    let a = interner.type_of(&mut TypeContext::new(s1), t1, rank)?;
    let b = interner.type_of(&mut TypeContext::new(s2), t2, rank)?;
    Ok(a == b)
}
