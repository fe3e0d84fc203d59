//! Factorization forests for aperiodic semigroups.
//!
//! The builder follows the induction on (size of the semigroup, size of the
//! alphabet): pick a letter `s` such that `t -> ts` is not surjective, cut the
//! word at runs of `s`, and recurse into the smaller semigroup `Ss` and the
//! smaller alphabet. When only `t -> st` is non-surjective the word is
//! reversed, the table transposed, and the resulting forest mirrored.

use super::{Homomorphism, Semigroup, SemigroupError};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

/// A node spanning positions `first..=last` (1-based). Leaves are single
/// positions without children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestNode {
    pub first: usize,
    pub last: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ForestNode>,
}

impl ForestNode {
    pub fn leaf(pos: usize) -> Self {
        ForestNode { first: pos, last: pos, children: Vec::new() }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Leaves have height 1; an inner node is one more than its tallest child.
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(ForestNode::height).max().unwrap_or(0)
    }

    fn shifted(mut self, by: usize) -> Self {
        self.first += by;
        self.last += by;
        self.children = self.children.into_iter().map(|c| c.shifted(by)).collect();
        self
    }

    /// Reflects positions of a word of length `n`.
    fn mirrored(self, n: usize) -> Self {
        ForestNode {
            first: n + 1 - self.last,
            last: n + 1 - self.first,
            children: self.children.into_iter().rev().map(|c| c.mirrored(n)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationForest {
    pub word: String,
    pub root: ForestNode,
}

impl FactorizationForest {
    pub fn height(&self) -> usize {
        self.root.height()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "word": self.word, "height": self.height(), "root": self.root })
    }

    /// Indented text dump, one node per line.
    pub fn to_text(&self, h: &Homomorphism) -> String {
        let letters: Vec<char> = self.word.chars().collect();
        let mut out = String::new();
        fn walk(n: &ForestNode, depth: usize, letters: &[char], h: &Homomorphism, out: &mut String) {
            let infix: String = letters[n.first - 1..n.last].iter().collect();
            let value = h.image(&infix).map(|x| h.element_name(x)).unwrap_or_else(|_| "?".into());
            let _ = writeln!(out, "{}[{}..{}] {} h={} height={}", "  ".repeat(depth), n.first, n.last, infix, value, n.height());
            for c in &n.children {
                walk(c, depth + 1, letters, h, out);
            }
        }
        walk(&self.root, 0, &letters, h, &mut out);
        out
    }
}

/// One violated clause found by [`validate_forest`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ForestViolation {
    /// The root does not span the whole word.
    RootSpan { first: usize, last: usize, len: usize },
    /// A leaf spans more than one position.
    WideLeaf { first: usize, last: usize },
    /// Children do not partition their parent into consecutive nonempty blocks.
    NotPartition { first: usize, last: usize },
    /// An infix of length at least 2 is split into a single block.
    SingleBlock { first: usize, last: usize },
    /// At least three blocks whose values under the homomorphism differ.
    UnequalSiblings { first: usize, last: usize },
    /// A letter without an image.
    UnknownLetter(char),
}

/// Checks that every block is nonempty, that infixes of length at least 2 have
/// at least two blocks, and that three or more sibling blocks have equal values.
pub fn validate_forest(f: &FactorizationForest, h: &Homomorphism) -> Vec<ForestViolation> {
    let letters: Vec<char> = f.word.chars().collect();
    let mut out = Vec::new();
    let mut values = Vec::with_capacity(letters.len());
    for &c in &letters {
        match h.letter(c) {
            Ok(x) => values.push(x),
            Err(_) => {
                out.push(ForestViolation::UnknownLetter(c));
                return out;
            }
        }
    }
    let n = letters.len();
    if f.root.first != 1 || f.root.last != n {
        out.push(ForestViolation::RootSpan { first: f.root.first, last: f.root.last, len: n });
        return out;
    }
    let value = |a: usize, b: usize| values[a - 1..b].iter().skip(1).fold(values[a - 1], |acc, &x| h.semigroup().mul(acc, x));
    fn walk(node: &ForestNode, value: &dyn Fn(usize, usize) -> usize, out: &mut Vec<ForestViolation>) {
        let (first, last) = (node.first, node.last);
        if node.is_leaf() {
            if first != last {
                out.push(ForestViolation::WideLeaf { first, last });
            }
            return;
        }
        let mut next = first;
        let mut ok = true;
        for c in &node.children {
            ok &= c.first == next && c.first <= c.last;
            next = c.last + 1;
        }
        if !ok || next != last + 1 {
            out.push(ForestViolation::NotPartition { first, last });
            return;
        }
        if node.children.len() < 2 && last > first {
            out.push(ForestViolation::SingleBlock { first, last });
        }
        if node.children.len() >= 3 {
            let v0 = value(node.children[0].first, node.children[0].last);
            if node.children.iter().any(|c| value(c.first, c.last) != v0) {
                out.push(ForestViolation::UnequalSiblings { first, last });
            }
        }
        for c in &node.children {
            walk(c, value, out);
        }
    }
    walk(&f.root, &value, &mut out);
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    /// `t -> ts` is not surjective.
    Right,
    /// `t -> st` is not surjective.
    Left,
}

/// The semigroup, possibly read with its multiplication reversed.
struct View<'a> {
    s: &'a Semigroup,
    transposed: bool,
}

impl View<'_> {
    fn mul(&self, a: usize, b: usize) -> usize {
        if self.transposed {
            self.s.mul(b, a)
        } else {
            self.s.mul(a, b)
        }
    }
}

/// Picks the smallest letter `s` (by element index) with a non-surjective
/// side multiplication on the subsemigroup generated by `alpha`.
fn choose(s: &Semigroup, transposed: bool, alpha: &BTreeSet<usize>) -> (usize, Side, BTreeSet<usize>) {
    let view = View { s, transposed };
    let closure = s.closure(alpha);
    for &x in alpha {
        let right: BTreeSet<usize> = closure.iter().map(|&t| view.mul(t, x)).collect();
        if right.len() < closure.len() {
            return (x, Side::Right, right);
        }
        let left: BTreeSet<usize> = closure.iter().map(|&t| view.mul(x, t)).collect();
        if left.len() < closure.len() {
            return (x, Side::Left, left);
        }
    }
    unreachable!("an aperiodic semigroup has at most one identity, so some letter qualifies")
}

struct Builder<'a> {
    s: &'a Semigroup,
}

impl Builder<'_> {
    fn flat(&self, len: usize) -> ForestNode {
        if len == 1 {
            ForestNode::leaf(1)
        } else {
            ForestNode { first: 1, last: len, children: (1..=len).map(ForestNode::leaf).collect() }
        }
    }

    fn node(children: Vec<ForestNode>) -> ForestNode {
        ForestNode { first: children[0].first, last: children.last().unwrap().last, children }
    }

    /// Forest for `w` over letters `alpha`, with positions 1..=|w|.
    fn build(&self, alpha: &BTreeSet<usize>, w: &[usize], transposed: bool) -> ForestNode {
        debug_assert!(w.iter().all(|x| alpha.contains(x)));
        if w.len() == 1 || alpha.len() == 1 {
            return self.flat(w.len());
        }
        let (s, side, t) = choose(self.s, transposed, alpha);
        match side {
            Side::Right => self.cut(alpha, w, s, &t, transposed),
            Side::Left => {
                let rev: Vec<usize> = w.iter().rev().copied().collect();
                self.cut(alpha, &rev, s, &t, !transposed).mirrored(w.len())
            }
        }
    }

    /// Case analysis on the occurrences of `s`, where `t -> ts` (in this view)
    /// maps onto the proper subsemigroup `tset`.
    fn cut(&self, alpha: &BTreeSet<usize>, w: &[usize], s: usize, tset: &BTreeSet<usize>, tr: bool) -> ForestNode {
        let mut rest = alpha.clone();
        rest.remove(&s);
        if !w.contains(&s) {
            return self.build(&rest, w, tr);
        }
        if w.iter().all(|&x| x == s) {
            return self.flat(w.len());
        }
        if w[0] == s {
            let k = w.iter().take_while(|&&x| x == s).count();
            let tail = self.cut(alpha, &w[k..], s, tset, tr).shifted(k);
            return Self::node(vec![self.flat(k), tail]);
        }
        if *w.last().unwrap() == s {
            return self.ends_with_s(&rest, w, s, tset, tr);
        }
        let last_s = w.iter().rposition(|&x| x == s).unwrap();
        let head = self.ends_with_s(&rest, &w[..=last_s], s, tset, tr);
        let tail = self.build(&rest, &w[last_s + 1..], tr).shifted(last_s + 1);
        Self::node(vec![head, tail])
    }

    /// `w = w1 s^k1 ... wn s^kn` with every `wi` free of `s`.
    fn ends_with_s(
        &self,
        rest: &BTreeSet<usize>,
        w: &[usize],
        s: usize,
        tset: &BTreeSet<usize>,
        tr: bool,
    ) -> ForestNode {
        let view = View { s: self.s, transposed: tr };
        let mut segments = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let start = i;
            while w[i] != s {
                i += 1;
            }
            let mid = i;
            while i < w.len() && w[i] == s {
                i += 1;
            }
            segments.push((start, mid, i));
        }
        let piece = |&(start, mid, end): &(usize, usize, usize)| {
            let left = self.build(rest, &w[start..mid], tr);
            let right = self.flat(end - mid).shifted(mid - start);
            Self::node(vec![left, right]).shifted(start)
        };
        if segments.len() == 1 {
            return piece(&segments[0]);
        }
        let values: Vec<usize> = segments
            .iter()
            .map(|&(start, _, end)| w[start + 1..end].iter().fold(w[start], |acc, &x| view.mul(acc, x)))
            .collect();
        let outer = self.build(tset, &values, tr);
        fn substitute(n: &ForestNode, segs: &[(usize, usize, usize)], piece: &dyn Fn(&(usize, usize, usize)) -> ForestNode) -> ForestNode {
            if n.is_leaf() {
                return piece(&segs[n.first - 1]);
            }
            let children: Vec<ForestNode> = n.children.iter().map(|c| substitute(c, segs, piece)).collect();
            Builder::node(children)
        }
        substitute(&outer, &segments, &piece)
    }
}

/// Builds a forest for `w` satisfying the forest clauses for `h`.
pub fn build_forest(h: &Homomorphism, w: &str) -> Result<FactorizationForest, SemigroupError> {
    if !h.semigroup().is_aperiodic() {
        return Err(SemigroupError::NotAperiodic);
    }
    if w.is_empty() {
        return Err(SemigroupError::EmptyWord);
    }
    let values: Vec<usize> = w.chars().map(|c| h.letter(c)).collect::<Result<_, _>>()?;
    let alpha: BTreeSet<usize> = h.alphabet().iter().map(|&c| h.letter(c).unwrap()).collect();
    let root = Builder { s: h.semigroup() }.build(&alpha, &values, false);
    Ok(FactorizationForest { word: w.to_string(), root })
}

/// The height bound of the construction: 2 for a one-letter alphabet,
/// otherwise `M_T + M_rest + 4` along the same choices as the builder.
pub fn height_bound(h: &Homomorphism) -> Result<usize, SemigroupError> {
    if !h.semigroup().is_aperiodic() {
        return Err(SemigroupError::NotAperiodic);
    }
    let alpha: BTreeSet<usize> = h.alphabet().iter().map(|&c| h.letter(c).unwrap()).collect();
    let mut memo = HashMap::new();
    Ok(bound(h.semigroup(), &alpha, false, &mut memo))
}

fn bound(s: &Semigroup, alpha: &BTreeSet<usize>, tr: bool, memo: &mut HashMap<(BTreeSet<usize>, bool), usize>) -> usize {
    if alpha.len() <= 1 {
        return 2;
    }
    if let Some(&b) = memo.get(&(alpha.clone(), tr)) {
        return b;
    }
    let (x, side, t) = choose(s, tr, alpha);
    let inner = if side == Side::Right { tr } else { !tr };
    let mut rest = alpha.clone();
    rest.remove(&x);
    let b = bound(s, &t, inner, memo) + bound(s, &rest, inner, memo) + 4;
    memo.insert((alpha.clone(), tr), b);
    b
}
