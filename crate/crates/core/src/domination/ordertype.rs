//! Quantifier-free orders on increasing tuples of rationals.
//!
//! Over a dense order, a quantifier-free comparison of two tuples depends only
//! on how their values interleave. A *merge type* records that interleaving
//! as the rank of each value among all distinct values.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::DominationError;
use crate::logic::{CompiledFormula, EvalConfig, Formula};
use crate::structures::LinearOrder;

/// Ranks of the values of `j` strictly increasing `k`-tuples, tuple by tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MergeType {
    pub k: usize,
    pub ranks: Vec<usize>,
}

impl MergeType {
    /// The merge type of concrete values.
    pub fn of<T: Ord>(k: usize, tuples: &[&[T]]) -> Self {
        let values: Vec<&T> = tuples.iter().flat_map(|t| t.iter()).collect();
        let mut distinct = values.clone();
        distinct.sort();
        distinct.dedup();
        let ranks = values.iter().map(|v| distinct.binary_search(v).unwrap()).collect();
        MergeType { k, ranks }
    }

    fn tuple(&self, i: usize) -> &[usize] {
        &self.ranks[i * self.k..(i + 1) * self.k]
    }

    /// Positions in a linear order realizing tuples `i` and `j`, concatenated.
    fn pair_args(&self, i: usize, j: usize) -> Vec<usize> {
        self.tuple(i).iter().chain(self.tuple(j)).map(|r| r + 1).collect()
    }

    fn width(&self) -> usize {
        self.ranks.iter().max().map_or(0, |m| m + 1)
    }

    /// All merge types of `j` strictly increasing `k`-tuples.
    pub fn all(k: usize, j: usize) -> Vec<MergeType> {
        fn go(k: usize, next: &mut Vec<usize>, ranks: &mut Vec<Vec<usize>>, level: usize, out: &mut Vec<MergeType>) {
            let open: Vec<usize> = (0..next.len()).filter(|&t| next[t] < k).collect();
            if open.is_empty() {
                out.push(MergeType { k, ranks: ranks.concat() });
                return;
            }
            for mask in 1..1u32 << open.len() {
                let chosen: Vec<usize> = (0..open.len()).filter(|b| mask >> b & 1 == 1).map(|b| open[b]).collect();
                for &t in &chosen {
                    ranks[t].push(level);
                    next[t] += 1;
                }
                go(k, next, ranks, level + 1, out);
                for &t in &chosen {
                    ranks[t].pop();
                    next[t] -= 1;
                }
            }
        }
        let mut out = Vec::new();
        go(k, &mut vec![0; j], &mut vec![Vec::new(); j], 0, &mut out);
        out
    }
}

impl fmt::Display for MergeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [char; 3] = ['x', 'y', 'z'];
        let mut by_rank: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (i, &r) in self.ranks.iter().enumerate() {
            let name = NAMES.get(i / self.k).copied().unwrap_or('w');
            by_rank.entry(r).or_default().push(format!("{name}{}", i % self.k + 1));
        }
        let groups: Vec<String> = by_rank.into_values().map(|g| g.join(" = ")).collect();
        write!(f, "{}", groups.join(" < "))
    }
}

/// The comparison outcome of a quantifier-free order for every merge type of
/// two strictly increasing `k`-tuples. `Less` means the first tuple is smaller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderTypeTable {
    pub k: usize,
    pub entries: BTreeMap<MergeType, Ordering>,
}

impl OrderTypeTable {
    /// Compares two strictly increasing tuples of any ordered values.
    pub fn compare<T: Ord>(&self, x: &[T], y: &[T]) -> Ordering {
        self.entries[&MergeType::of(self.k, &[x, y])]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_atoms(f: &Formula) -> Result<(), DominationError> {
    match f {
        Formula::True | Formula::False | Formula::Less(..) | Formula::Equal(..) => Ok(()),
        Formula::Not(g) => check_atoms(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(check_atoms),
        Formula::Exists(..) | Formula::Forall(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => {
            Err(DominationError::NotQuantifierFree(f.to_string()))
        }
        _ => Err(DominationError::BadAtom(f.to_string())),
    }
}

/// Tabulates the strict order `f(xs, ys)` over all merge types and checks
/// that it is a linear order on strictly increasing tuples.
pub fn rational_order_table(f: &Formula, xs: &[String], ys: &[String]) -> Result<OrderTypeTable, DominationError> {
    check_atoms(f)?;
    let k = xs.len();
    assert_eq!(k, ys.len(), "tuple variables of different lengths");
    let mut params = xs.to_vec();
    params.extend_from_slice(ys);
    if let Some(v) = f.free_vars().into_iter().find(|v| !params.contains(v)) {
        return Err(DominationError::StrayVariable(v));
    }
    let compiled = CompiledFormula::new(f, &params);
    let holds = |m: &MergeType, i: usize, j: usize| -> Result<bool, DominationError> {
        let model = LinearOrder(m.width());
        Ok(compiled.eval_cfg(&model, &m.pair_args(i, j), &EvalConfig::default())?)
    };
    let mut entries = BTreeMap::new();
    for m in MergeType::all(k, 2) {
        let (xy, yx) = (holds(&m, 0, 1)?, holds(&m, 1, 0)?);
        let outcome = if m.tuple(0) == m.tuple(1) {
            if xy {
                return Err(DominationError::NotIrreflexive(m.to_string()));
            }
            Ordering::Equal
        } else {
            match (xy, yx) {
                (true, false) => Ordering::Less,
                (false, true) => Ordering::Greater,
                (true, true) => return Err(DominationError::NotAntisymmetric(m.to_string())),
                (false, false) => return Err(DominationError::NotTotal(m.to_string())),
            }
        };
        entries.insert(m, outcome);
    }
    let table = OrderTypeTable { k, entries };
    for m in MergeType::all(k, 3) {
        let (x, y, z) = (m.tuple(0), m.tuple(1), m.tuple(2));
        let less = |a: &[usize], b: &[usize]| table.compare(a, b) == Ordering::Less;
        if less(x, y) && less(y, z) && !less(x, z) {
            return Err(DominationError::NotTransitive(m.to_string()));
        }
    }
    Ok(table)
}

/// `a <^p b` on values: `b` is above `a` for `p = 1`, below for `p = -1`.
fn stepped(a: usize, b: usize, p: isize) -> bool {
    if p > 0 {
        a < b
    } else {
        a > b
    }
}

/// Whether `x_d <^p y_d` forces `x ≺ y` for every merge type in the table
/// that satisfies `restrict`.
fn implication_holds(table: &OrderTypeTable, d: usize, p: isize, restrict: impl Fn(&MergeType) -> bool) -> bool {
    table.entries.iter().filter(|(m, _)| restrict(m)).all(|(m, &o)| {
        let (x, y) = (m.tuple(0), m.tuple(1));
        !stepped(x[d - 1], y[d - 1], p) || o == Ordering::Less
    })
}

/// All `(d, p)` whose implication holds on the whole table, smallest `d`
/// first and `p = 1` before `p = -1`.
pub fn rational_domination_candidates(table: &OrderTypeTable) -> Vec<(usize, isize)> {
    let mut out = Vec::new();
    for d in 1..=table.k {
        for p in [1, -1] {
            if implication_holds(table, d, p, |_| true) {
                out.push((d, p));
            }
        }
    }
    out
}

/// The dominating coordinate and polarity, found through the tournament of
/// pairwise restrictions: for `i < j`, restrict to tuple pairs that agree
/// outside `{i, j}` and see which of the two coordinates dominates there.
/// The maximum of the resulting order on coordinates dominates overall.
pub fn rational_dominating_coordinate(table: &OrderTypeTable) -> Result<(usize, isize), DominationError> {
    let k = table.k;
    if k == 1 {
        let up = MergeType { k: 1, ranks: vec![0, 1] };
        return Ok(if table.entries[&up] == Ordering::Less { (1, 1) } else { (1, -1) });
    }
    // beats[i][j]: j dominates i in their pairwise restriction
    let mut beats = vec![vec![false; k + 1]; k + 1];
    let mut polarity = vec![vec![0isize; k + 1]; k + 1];
    for i in 1..=k {
        for j in i + 1..=k {
            let agree_elsewhere = |m: &MergeType| {
                let (x, y) = (m.tuple(0), m.tuple(1));
                (1..=k).filter(|&c| c != i && c != j).all(|c| x[c - 1] == y[c - 1])
            };
            let mut found = Vec::new();
            for c in [i, j] {
                for p in [1, -1] {
                    if implication_holds(table, c, p, agree_elsewhere) {
                        found.push((c, p));
                    }
                }
            }
            let &[(c, p)] = found.as_slice() else {
                return Err(DominationError::NoPairwiseDomination { i, j });
            };
            let other = if c == i { j } else { i };
            beats[other][c] = true;
            polarity[other][c] = p;
        }
    }
    for a in 1..=k {
        for b in 1..=k {
            for c in 1..=k {
                if beats[a][b] && beats[b][c] && !beats[a][c] {
                    return Err(DominationError::TournamentNotTransitive { a, b, c });
                }
            }
        }
    }
    let d = (1..=k).find(|&d| (1..=k).all(|i| i == d || beats[i][d])).expect("a transitive tournament has a maximum");
    let other = if d == 1 { 2 } else { 1 };
    let p = polarity[other][d];
    if !implication_holds(table, d, p, |_| true) {
        return Err(DominationError::TournamentDisagrees { d, p });
    }
    Ok((d, p))
}
