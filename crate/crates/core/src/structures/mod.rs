//! Words as relational structures, products of linear orders, and rank-r types.

mod ef;
mod threshold;
mod types;

use crate::logic::{Coord, Model, Relation};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub use ef::ef_game;
pub use threshold::{threshold_signature, ThresholdSignature};
pub use types::{ef_equivalent, rank_type_id, BudgetExceeded, TypeContext, TypeId, TypeInterner, DEFAULT_BUDGET};

/// Which binary relation a word model carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vocabulary {
    Ordered,
    Successor,
}

/// A named interval of positions `first..=last` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NamedInterval {
    pub name: String,
    pub first: usize,
    pub last: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordStructure {
    letters: Vec<char>,
    vocabulary: Vocabulary,
    /// Block index (0-based) of each position, when a block order is present.
    blocks: Option<Vec<usize>>,
    intervals: Vec<NamedInterval>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("blocks must be nonempty and cover positions 1..={0} consecutively")]
    BadBlocks(usize),
    #[error("interval `{0}` is empty or out of range")]
    BadInterval(String),
    #[error("intervals `{0}` and `{1}` overlap without being equal")]
    OverlappingIntervals(String, String),
}

/// The ordered model of `w`: labels and `<`.
pub fn ordered_model(w: &str) -> WordStructure {
    WordStructure { letters: w.chars().collect(), vocabulary: Vocabulary::Ordered, blocks: None, intervals: Vec::new() }
}

/// The successor model of `w`: labels and the successor relation.
pub fn successor_model(w: &str) -> WordStructure {
    WordStructure { vocabulary: Vocabulary::Successor, ..ordered_model(w) }
}

/// Concatenation of `words` with the block order between them.
pub fn ordered_product<S: AsRef<str>>(words: &[S]) -> WordStructure {
    assert!(!words.is_empty(), "ordered product of no words");
    let mut letters = Vec::new();
    let mut blocks = Vec::new();
    for (i, w) in words.iter().enumerate() {
        for c in w.as_ref().chars() {
            letters.push(c);
            blocks.push(i);
        }
    }
    WordStructure { letters, vocabulary: Vocabulary::Ordered, blocks: Some(blocks), intervals: Vec::new() }
}

impl WordStructure {
    pub fn word(&self) -> String {
        self.letters.iter().collect()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn vocabulary(&self) -> Vocabulary {
        self.vocabulary
    }

    /// Replaces the block decomposition; `lengths` are the block sizes in order.
    pub fn with_block_lengths(mut self, lengths: &[usize]) -> Result<Self, StructureError> {
        if lengths.contains(&0) || lengths.iter().sum::<usize>() != self.len() {
            return Err(StructureError::BadBlocks(self.len()));
        }
        self.blocks = Some(lengths.iter().enumerate().flat_map(|(i, &l)| std::iter::repeat_n(i, l)).collect());
        Ok(self)
    }

    pub fn without_blocks(mut self) -> Self {
        self.blocks = None;
        self
    }

    /// Adds distinguished intervals; pairs must be equal or disjoint.
    pub fn with_intervals(mut self, intervals: Vec<NamedInterval>) -> Result<Self, StructureError> {
        for iv in &intervals {
            if iv.first == 0 || iv.first > iv.last || iv.last > self.len() {
                return Err(StructureError::BadInterval(iv.name.clone()));
            }
        }
        for (i, a) in intervals.iter().enumerate() {
            for b in &intervals[i + 1..] {
                let equal = a.first == b.first && a.last == b.last;
                let disjoint = a.last < b.first || b.last < a.first;
                if !equal && !disjoint {
                    return Err(StructureError::OverlappingIntervals(a.name.clone(), b.name.clone()));
                }
            }
        }
        self.intervals = intervals;
        Ok(self)
    }

    pub fn intervals(&self) -> &[NamedInterval] {
        &self.intervals
    }

    pub fn has_blocks(&self) -> bool {
        self.blocks.is_some()
    }

    /// Block index (0-based) of a position (1-based).
    pub fn block_of(&self, pos: usize) -> Option<usize> {
        self.blocks.as_ref().map(|b| b[pos - 1])
    }

    pub fn block_count(&self) -> usize {
        match &self.blocks {
            Some(b) => b.last().map_or(0, |l| l + 1),
            None => usize::from(!self.is_empty()),
        }
    }

    /// Block boundaries as `(first, last)` position pairs.
    pub fn block_spans(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for p in 1..=self.len() {
            let b = self.block_of(p).unwrap_or(0);
            match out.get_mut(b) {
                Some(span) => span.1 = p,
                None => out.push((p, p)),
            }
        }
        out
    }

    /// Signed number of blocks from `x` to `y`.
    pub fn block_distance(&self, x: usize, y: usize) -> isize {
        match &self.blocks {
            Some(b) => b[y - 1] as isize - b[x - 1] as isize,
            None => 0,
        }
    }

    /// `x ⊏^p y`: for `p > 0`, `y` lies at least `p` blocks after `x`; for
    /// `p < 0`, `x` lies at least `-p` blocks after `y`. `p = 0` is equality of blocks.
    pub fn block_step(&self, x: usize, y: usize, p: isize) -> bool {
        let d = self.block_distance(x, y);
        match p.cmp(&0) {
            Ordering::Greater => d >= p,
            Ordering::Less => d <= p,
            Ordering::Equal => d == 0,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let view = StructureView {
            word: self.word(),
            positions: self.len(),
            labels: self.letters.iter().map(|c| c.to_string()).collect(),
            vocabulary: self.vocabulary,
            blocks: self.blocks.as_ref().map(|_| self.block_spans().into_iter().map(|(a, b)| [a, b]).collect()),
            intervals: self.intervals.clone(),
        };
        serde_json::to_value(view).expect("structure serializes")
    }
}

#[derive(Serialize)]
struct StructureView {
    word: String,
    positions: usize,
    labels: Vec<String>,
    vocabulary: Vocabulary,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    intervals: Vec<NamedInterval>,
}

impl Model for WordStructure {
    fn size(&self) -> usize {
        self.letters.len()
    }

    fn supports(&self, rel: Relation) -> bool {
        match rel {
            Relation::Labels | Relation::Successor => true,
            Relation::Order => self.vocabulary == Vocabulary::Ordered,
            Relation::Block => self.blocks.is_some(),
            Relation::Coordinates => false,
        }
    }

    fn label(&self, pos: usize) -> Option<char> {
        self.letters.get(pos.wrapping_sub(1)).copied()
    }

    fn less(&self, a: usize, b: usize) -> bool {
        a < b
    }

    fn succ(&self, a: usize, b: usize) -> bool {
        a + 1 == b
    }

    fn block_less(&self, a: usize, b: usize) -> bool {
        self.block_distance(a, b) > 0
    }
}

/// Structures whose tuples have a computable quantifier-free type.
pub trait Typed: Model {
    /// Appends a code for the atomic facts about `tuple`. Codes are
    /// comparable across structures of the same vocabulary.
    fn atomic_signature(&self, tuple: &[usize], out: &mut Vec<u32>);
}

fn cmp_code(o: Ordering) -> u32 {
    match o {
        Ordering::Less => 0,
        Ordering::Equal => 1,
        Ordering::Greater => 2,
    }
}

impl Typed for WordStructure {
    fn atomic_signature(&self, tuple: &[usize], out: &mut Vec<u32>) {
        for &a in tuple {
            out.push(self.letters[a - 1] as u32);
            for iv in &self.intervals {
                out.push(u32::from(iv.first <= a && a <= iv.last));
            }
        }
        for (i, &a) in tuple.iter().enumerate() {
            for &b in &tuple[i + 1..] {
                match self.vocabulary {
                    Vocabulary::Ordered => out.push(cmp_code(a.cmp(&b))),
                    Vocabulary::Successor => {
                        out.push(u32::from(a == b) | u32::from(a + 1 == b) << 1 | u32::from(b + 1 == a) << 2)
                    }
                }
                if self.blocks.is_some() {
                    out.push(cmp_code(self.block_distance(b, a).cmp(&0)));
                }
            }
        }
    }
}

/// A pure finite linear order `1 < 2 < ... < n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrder(pub usize);

impl Model for LinearOrder {
    fn size(&self) -> usize {
        self.0
    }

    fn supports(&self, rel: Relation) -> bool {
        matches!(rel, Relation::Order | Relation::Successor)
    }

    fn label(&self, _pos: usize) -> Option<char> {
        None
    }

    fn less(&self, a: usize, b: usize) -> bool {
        a < b
    }

    fn succ(&self, a: usize, b: usize) -> bool {
        a + 1 == b
    }
}

impl Typed for LinearOrder {
    fn atomic_signature(&self, tuple: &[usize], out: &mut Vec<u32>) {
        for (i, &a) in tuple.iter().enumerate() {
            for &b in &tuple[i + 1..] {
                out.push(cmp_code(a.cmp(&b)));
            }
        }
    }
}

/// A direct product of powers of finite linear orders. Factor `i` is the
/// order `1..=n_i` raised to the power `k_i`; an element is a tuple of tuples
/// `x[i][j]`. Elements are numbered `1..=size()` in mixed radix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductStructure {
    factors: Vec<(usize, usize)>,
    size: usize,
}

impl ProductStructure {
    /// `factors` lists `(n_i, k_i)` pairs.
    pub fn new(factors: Vec<(usize, usize)>) -> Self {
        assert!(!factors.is_empty(), "product of no factors");
        assert!(factors.iter().all(|&(n, k)| n >= 1 && k >= 1), "factor sizes and powers must be positive");
        let size = factors.iter().map(|&(n, k)| n.pow(k as u32)).product();
        ProductStructure { factors, size }
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    /// Coordinate `x[factor][index]`, both 1-based.
    pub fn coord(&self, elem: usize, factor: usize, index: usize) -> usize {
        let mut rest = elem - 1;
        for (i, &(n, k)) in self.factors.iter().enumerate() {
            for j in 1..=k {
                let v = rest % n;
                rest /= n;
                if i + 1 == factor && j == index {
                    return v + 1;
                }
            }
        }
        panic!("coordinate {factor}.{index} out of range")
    }

    /// All coordinates of an element, factor by factor.
    pub fn decode(&self, elem: usize) -> Vec<Vec<usize>> {
        let mut rest = elem - 1;
        self.factors
            .iter()
            .map(|&(n, k)| {
                (0..k)
                    .map(|_| {
                        let v = rest % n;
                        rest /= n;
                        v + 1
                    })
                    .collect()
            })
            .collect()
    }

    pub fn encode(&self, coords: &[Vec<usize>]) -> usize {
        let mut elem = 0;
        let mut scale = 1;
        for (&(n, k), xs) in self.factors.iter().zip(coords) {
            assert_eq!(xs.len(), k);
            for &v in xs {
                assert!((1..=n).contains(&v));
                elem += (v - 1) * scale;
                scale *= n;
            }
        }
        elem + 1
    }
}

impl Model for ProductStructure {
    fn size(&self) -> usize {
        self.size
    }

    fn supports(&self, rel: Relation) -> bool {
        rel == Relation::Coordinates
    }

    fn label(&self, _pos: usize) -> Option<char> {
        None
    }

    fn less(&self, _a: usize, _b: usize) -> bool {
        false
    }

    fn succ(&self, _a: usize, _b: usize) -> bool {
        false
    }

    fn coord_cmp(&self, c: Coord, a: usize, b: usize) -> Option<Ordering> {
        let &(_, k) = self.factors.get(c.factor.checked_sub(1)?)?;
        if c.left > k || c.right > k {
            return None;
        }
        Some(self.coord(a, c.factor, c.left).cmp(&self.coord(b, c.factor, c.right)))
    }
}

impl Typed for ProductStructure {
    fn atomic_signature(&self, tuple: &[usize], out: &mut Vec<u32>) {
        let decoded: Vec<Vec<Vec<usize>>> = tuple.iter().map(|&e| self.decode(e)).collect();
        for (i, x) in decoded.iter().enumerate() {
            for y in &decoded[i..] {
                for (xf, yf) in x.iter().zip(y) {
                    for a in xf {
                        for b in yf {
                            out.push(cmp_code(a.cmp(b)));
                        }
                    }
                }
            }
        }
    }
}
