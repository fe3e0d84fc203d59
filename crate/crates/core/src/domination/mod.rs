//! Dominating coordinates of definable orders.
//!
//! Given a linear order `≺` on tuples and a type `t`, a dominating coordinate
//! `d` with polarity `p` satisfies: if `x_d` lies in an earlier block than
//! `y_d` (later, for `p = -1`), then `x ≺ y`, for all `x, y` of type `t`.
//! [`rational_dominating_coordinate`] solves this exactly for quantifier-free
//! orders on increasing tuples of rationals; [`find_domination`] and
//! [`find_product_domination`] search for certificates on finite instances
//! and verify each one against every pair of typed tuples.

mod ordertype;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use ordertype::{
    rational_domination_candidates, rational_dominating_coordinate, rational_order_table, MergeType, OrderTypeTable,
};

use crate::interpretation::{linearize, OrderViolation};
use crate::logic::{CompiledFormula, EvalConfig, EvalError, Formula, Model};
use crate::structures::{BudgetExceeded, ProductStructure, TypeContext, TypeId, TypeInterner, Typed, WordStructure};

#[derive(Debug, Error)]
pub enum DominationError {
    #[error("`{0}` is not quantifier-free")]
    NotQuantifierFree(String),
    #[error("`{0}` uses a relation other than < and =")]
    BadAtom(String),
    #[error("free variable `{0}` is not a tuple coordinate")]
    StrayVariable(String),
    #[error("a tuple is below itself when {0}")]
    NotIrreflexive(String),
    #[error("neither tuple is below the other when {0}")]
    NotTotal(String),
    #[error("each tuple is below the other when {0}")]
    NotAntisymmetric(String),
    #[error("order is not transitive when {0}")]
    NotTransitive(String),
    #[error("neither coordinate {i} nor {j} dominates their pairwise restriction")]
    NoPairwiseDomination { i: usize, j: usize },
    #[error("coordinate tournament is not transitive: {a} -> {b} -> {c}")]
    TournamentNotTransitive { a: usize, b: usize, c: usize },
    #[error("tournament maximum ({d}, {p}) does not dominate")]
    TournamentDisagrees { d: usize, p: isize },
    #[error("structure has no block decomposition")]
    NoBlocks,
    #[error("order is not linear on the instance: {0}")]
    NotLinear(OrderViolation),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A verified dominating coordinate for one type on one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationCertificate {
    #[serde(rename = "type")]
    pub type_id: TypeId,
    /// The least tuple of the type (positions for words, coordinates for
    /// products, flattened).
    pub representative: Vec<usize>,
    pub d: usize,
    /// Inner coordinate within factor `d` of a product structure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    pub p: isize,
    pub scope: String,
    pub class_size: usize,
}

/// A type for which no candidate certificate holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationGap {
    #[serde(rename = "type")]
    pub type_id: TypeId,
    pub representative: Vec<usize>,
    pub class_size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DominationReport {
    /// Every valid certificate, grouped by type in order of first
    /// occurrence; within a type, smallest `d` (then `e`) first and `p > 0`
    /// before `p < 0`.
    pub certificates: Vec<DominationCertificate>,
    pub gaps: Vec<DominationGap>,
}

impl DominationReport {
    /// The preferred certificate for a type.
    pub fn chosen(&self, t: TypeId) -> Option<&DominationCertificate> {
        self.certificates.iter().find(|c| c.type_id == t)
    }

    pub fn is_complete(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// A strict order on tuples given by a formula with parameters `xs ++ ys`.
pub struct FormulaOrder<'m, M: Model + ?Sized> {
    compiled: CompiledFormula,
    model: &'m M,
    k: usize,
}

impl<'m, M: Model + ?Sized> FormulaOrder<'m, M> {
    pub fn new(f: &Formula, xs: &[String], ys: &[String], model: &'m M) -> Result<Self, EvalError> {
        let mut params = xs.to_vec();
        params.extend_from_slice(ys);
        let compiled = CompiledFormula::new(f, &params);
        compiled.check_model(model, &EvalConfig::default())?;
        Ok(FormulaOrder { compiled, model, k: xs.len() })
    }

    pub fn less(&self, x: &[usize], y: &[usize]) -> bool {
        let mut args = Vec::with_capacity(2 * self.k);
        args.extend_from_slice(x);
        args.extend_from_slice(y);
        self.compiled.eval_unchecked(self.model, &args)
    }
}

/// Checks that `less` is a strict linear order on `tuples`.
pub fn check_linear(less: &dyn Fn(&[usize], &[usize]) -> bool, tuples: &[Vec<usize>]) -> Result<(), OrderViolation> {
    let rel: Vec<Vec<bool>> =
        tuples.iter().enumerate().map(|(i, a)| tuples.iter().enumerate().map(|(j, b)| i == j || less(a, b)).collect()).collect();
    for (i, a) in tuples.iter().enumerate() {
        if less(a, a) {
            return Err(OrderViolation::NotAntisymmetric { a: a.clone(), b: tuples[i].clone() });
        }
    }
    linearize(&rel, tuples).map(|_| ())
}

/// Groups `items` by type, keeping classes in order of first occurrence.
fn classes<M: Typed + ?Sized>(
    model: &M,
    items: &[Vec<usize>],
    rank: usize,
) -> Result<Vec<(TypeId, Vec<usize>)>, BudgetExceeded> {
    let mut interner = TypeInterner::new();
    let mut ctx = TypeContext::new(model);
    let mut out: Vec<(TypeId, Vec<usize>)> = Vec::new();
    let mut index: BTreeMap<TypeId, usize> = BTreeMap::new();
    for (i, t) in items.iter().enumerate() {
        let id = interner.type_of(&mut ctx, t, rank)?;
        match index.get(&id) {
            Some(&c) => out[c].1.push(i),
            None => {
                index.insert(id, out.len());
                out.push((id, vec![i]));
            }
        }
    }
    Ok(out)
}

/// Whether `premise(x, y)` implies `x ≺ y` for all members of a class.
fn dominates(members: &[&[usize]], less: &dyn Fn(&[usize], &[usize]) -> bool, premise: impl Fn(&[usize], &[usize]) -> bool) -> bool {
    members.iter().all(|x| members.iter().all(|y| !premise(x, y) || less(x, y)))
}

/// The word with `|` between blocks.
fn block_scope(s: &WordStructure) -> String {
    let letters = s.letters();
    s.block_spans().iter().map(|&(a, b)| letters[a - 1..b].iter().collect::<String>()).collect::<Vec<_>>().join("|")
}

/// Searches, for each rank-`rank` type realized by `tuples` in `s`, every
/// `(d, p)` with `p = ±1` such that `x_d ⊏^p y_d` implies `x ≺ y` on that
/// type. `less` must be a strict linear order on `tuples`.
pub fn find_domination(
    less: &dyn Fn(&[usize], &[usize]) -> bool,
    s: &WordStructure,
    tuples: &[Vec<usize>],
    rank: usize,
) -> Result<DominationReport, DominationError> {
    if !s.has_blocks() {
        return Err(DominationError::NoBlocks);
    }
    check_linear(less, tuples).map_err(DominationError::NotLinear)?;
    let scope = block_scope(s);
    let mut report = DominationReport::default();
    for (type_id, idx) in classes(s, tuples, rank)? {
        let members: Vec<&[usize]> = idx.iter().map(|&i| tuples[i].as_slice()).collect();
        let representative = least(&members, less).to_vec();
        let found = block_certificates(less, s, &members);
        for &(d, p) in &found {
            report.certificates.push(DominationCertificate {
                type_id,
                representative: representative.clone(),
                d,
                e: None,
                p,
                scope: scope.clone(),
                class_size: members.len(),
            });
        }
        if found.is_empty() {
            report.gaps.push(DominationGap { type_id, representative, class_size: members.len() });
        }
    }
    Ok(report)
}

/// Every `(d, p)`, `p = ±1`, such that `x_d ⊏^p y_d` implies `x ≺ y` for all
/// `x, y` in `members`.
pub fn block_certificates(
    less: &dyn Fn(&[usize], &[usize]) -> bool,
    s: &WordStructure,
    members: &[&[usize]],
) -> Vec<(usize, isize)> {
    let k = members.first().map_or(0, |m| m.len());
    let mut out = Vec::new();
    for d in 1..=k {
        for p in [1isize, -1] {
            if dominates(members, less, |x, y| s.block_step(x[d - 1], y[d - 1], p)) {
                out.push((d, p));
            }
        }
    }
    out
}

fn least<'a>(members: &[&'a [usize]], less: &dyn Fn(&[usize], &[usize]) -> bool) -> &'a [usize] {
    members.iter().copied().reduce(|a, b| if less(b, a) { b } else { a }).expect("classes are nonempty")
}

/// `a <^p b` in a linear order: `b - a >= p` for `p > 0`, `a - b >= -p` for `p < 0`.
pub fn linear_step(a: usize, b: usize, p: isize) -> bool {
    let diff = b as isize - a as isize;
    if p > 0 {
        diff >= p
    } else {
        diff <= p
    }
}

/// Certificates for a linear order on the elements of a product of powers of
/// linear orders, one search per unary rank-`rank` type. A candidate is a
/// coordinate `(d, e)` with polarity `p`, `1 <= |p| <= max_polarity`; for each
/// type only the smallest working `|p|` is reported.
pub fn find_product_domination(
    less: &dyn Fn(usize, usize) -> bool,
    s: &ProductStructure,
    rank: usize,
    max_polarity: usize,
) -> Result<DominationReport, DominationError> {
    let elems: Vec<Vec<usize>> = (1..=s.size()).map(|e| vec![e]).collect();
    let tuple_less = |a: &[usize], b: &[usize]| less(a[0], b[0]);
    check_linear(&tuple_less, &elems).map_err(DominationError::NotLinear)?;
    let scope = format!("{:?}", s.factors());
    let mut report = DominationReport::default();
    for (type_id, idx) in classes(s, &elems, rank)? {
        let members: Vec<usize> = idx.iter().map(|&i| i + 1).collect();
        let coords: Vec<Vec<Vec<usize>>> = members.iter().map(|&m| s.decode(m)).collect();
        let least_idx = (0..members.len()).reduce(|a, b| if less(members[b], members[a]) { b } else { a }).unwrap();
        let representative: Vec<usize> = coords[least_idx].concat();
        let mut found = false;
        'size: for size in 1..=max_polarity as isize {
            for (d, &(_, kd)) in s.factors().iter().enumerate() {
                for e in 0..kd {
                    for p in [size, -size] {
                        let ok = (0..members.len()).all(|i| {
                            (0..members.len()).all(|j| {
                                !linear_step(coords[i][d][e], coords[j][d][e], p) || less(members[i], members[j])
                            })
                        });
                        if ok {
                            found = true;
                            report.certificates.push(DominationCertificate {
                                type_id,
                                representative: representative.clone(),
                                d: d + 1,
                                e: Some(e + 1),
                                p,
                                scope: scope.clone(),
                                class_size: members.len(),
                            });
                        }
                    }
                }
            }
            if found {
                break 'size;
            }
        }
        if !found {
            report.gaps.push(DominationGap { type_id, representative, class_size: members.len() });
        }
    }
    Ok(report)
}

/// A lexicographic order on coordinate vectors: compare coordinates in
/// `priority` order, each ascending or descending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexOrder {
    pub priority: Vec<usize>,
    pub descending: Vec<bool>,
}

impl LexOrder {
    pub fn less(&self, x: &[usize], y: &[usize]) -> bool {
        for (&c, &desc) in self.priority.iter().zip(&self.descending) {
            if x[c] != y[c] {
                return (x[c] < y[c]) != desc;
            }
        }
        false
    }

    /// All `n! · 2^n` lexicographic orders on `n` coordinates.
    pub fn all(n: usize) -> Vec<LexOrder> {
        fn perms(rest: Vec<usize>, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(acc.clone());
            }
            for (i, &c) in rest.iter().enumerate() {
                let mut r = rest.clone();
                r.remove(i);
                acc.push(c);
                perms(r, acc, out);
                acc.pop();
            }
        }
        let mut ps = Vec::new();
        perms((0..n).collect(), &mut Vec::new(), &mut ps);
        let mut out = Vec::new();
        for p in ps {
            for mask in 0..1u32 << n {
                let descending = (0..n).map(|i| mask >> i & 1 == 1).collect();
                out.push(LexOrder { priority: p.clone(), descending });
            }
        }
        out
    }
}

/// The lexicographic orders that agree with `less` on every pair of `members`
/// (elements given by their flattened coordinate vectors).
pub fn matching_lex_orders(less: &dyn Fn(&[usize], &[usize]) -> bool, members: &[Vec<usize>]) -> Vec<LexOrder> {
    let n = members.first().map_or(0, Vec::len);
    LexOrder::all(n)
        .into_iter()
        .filter(|lex| members.iter().all(|x| members.iter().all(|y| lex.less(x, y) == less(x, y))))
        .collect()
}

/// The unary rank-`rank` type classes of a product structure, as flattened
/// coordinate vectors.
pub fn product_type_classes(s: &ProductStructure, rank: usize) -> Result<Vec<(TypeId, Vec<Vec<usize>>)>, BudgetExceeded> {
    let elems: Vec<Vec<usize>> = (1..=s.size()).map(|e| vec![e]).collect();
    Ok(classes(s, &elems, rank)?
        .into_iter()
        .map(|(t, idx)| (t, idx.into_iter().map(|i| s.decode(i + 1).concat()).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpretation::all_tuples;
    use crate::logic::{indexed_vars, parse_formula};
    use crate::structures::ordered_model;

    fn lex2(x: &[usize], y: &[usize]) -> bool {
        x < y
    }

    #[test]
    fn lexicographic_pairs_on_repeated_blocks() {
        let s = ordered_model("abababab").with_block_lengths(&[2, 2, 2, 2]).unwrap();
        let tuples = all_tuples(8, 2);
        let r = find_domination(&lex2, &s, &tuples, 1).unwrap();
        assert!(r.is_complete());
        let mut types: Vec<TypeId> = r.certificates.iter().map(|c| c.type_id).collect();
        types.dedup();
        for t in types {
            let c = r.chosen(t).unwrap();
            assert_eq!((c.d, c.p), (1, 1));
        }
        assert_eq!(r.certificates[0].scope, "ab|ab|ab|ab");
    }

    #[test]
    fn example_order_on_singleton_blocks() {
        let s = ordered_model("abbb").with_block_lengths(&[1, 1, 1, 1]).unwrap();
        let f = parse_formula("(or (< x1 y1) (and (= x1 y1) (> x2 y2)))").unwrap();
        let order = FormulaOrder::new(&f, &indexed_vars("x", 2), &indexed_vars("y", 2), &s).unwrap();
        let tuples: Vec<Vec<usize>> = all_tuples(4, 2).into_iter().filter(|t| t[1] <= t[0]).collect();
        let r = find_domination(&|x, y| order.less(x, y), &s, &tuples, 2).unwrap();
        assert!(r.is_complete());
        assert!(r.certificates.iter().all(|c| r.chosen(c.type_id).map(|c| (c.d, c.p)) == Some((1, 1))));
    }

    #[test]
    fn label_first_order_has_a_gap_across_labels() {
        let s = ordered_model("abab").with_block_lengths(&[1, 1, 1, 1]).unwrap();
        let label_first = |x: &[usize], y: &[usize]| {
            let key = |p: usize| (s.letters()[p - 1] != 'a', p);
            key(x[0]) < key(y[0])
        };
        let tuples = all_tuples(4, 1);
        let mixed: Vec<&[usize]> = tuples.iter().map(Vec::as_slice).collect();
        assert!(block_certificates(&label_first, &s, &mixed).is_empty());
        let r = find_domination(&label_first, &s, &tuples, 0).unwrap();
        assert!(r.is_complete());
        assert_eq!(r.certificates.len(), 2);
        assert!(r.certificates.iter().all(|c| (c.d, c.p) == (1, 1) && c.class_size == 2));
    }

    #[test]
    fn non_linear_orders_rejected() {
        let s = ordered_model("ab").with_block_lengths(&[1, 1]).unwrap();
        let e = find_domination(&|_, _| false, &s, &all_tuples(2, 1), 1).unwrap_err();
        assert!(matches!(e, DominationError::NotLinear(OrderViolation::NotTotal { .. })));
        let plain = ordered_model("ab");
        assert!(matches!(find_domination(&lex2, &plain, &[], 1), Err(DominationError::NoBlocks)));
    }

    #[test]
    fn product_search_and_lex_orders() {
        let s = ProductStructure::new(vec![(5, 1), (5, 1)]);
        // second coordinate descending, then first ascending
        let less = |a: usize, b: usize| {
            let (x, y) = (s.decode(a).concat(), s.decode(b).concat());
            (std::cmp::Reverse(x[1]), x[0]) < (std::cmp::Reverse(y[1]), y[0])
        };
        let r = find_product_domination(&less, &s, 1, 5).unwrap();
        assert!(r.is_complete());
        let middle: Vec<_> = r.certificates.iter().filter(|c| c.representative == [2, 4]).collect();
        assert_eq!(middle.len(), 1);
        assert_eq!((middle[0].d, middle[0].e, middle[0].p, middle[0].class_size), (2, Some(1), -1, 9));
        assert_eq!(LexOrder::all(2).len(), 8);
        assert_eq!(LexOrder::all(3).len(), 48);
        for (_, members) in product_type_classes(&s, 1).unwrap() {
            let m = matching_lex_orders(&|x, y| (std::cmp::Reverse(x[1]), x[0]) < (std::cmp::Reverse(y[1]), y[0]), &members);
            assert!(m.contains(&LexOrder { priority: vec![1, 0], descending: vec![true, false] }));
        }
        assert!(linear_step(2, 4, 2) && !linear_step(2, 3, 2) && linear_step(4, 1, -3));
    }
}
