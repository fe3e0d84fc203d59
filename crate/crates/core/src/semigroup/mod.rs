//! Finite semigroups, homomorphisms from nonempty words, the rank-r type
//! semigroup of words, and factorization forests.

mod forest;

use crate::structures::{ordered_model, BudgetExceeded, TypeContext, TypeId, TypeInterner};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

pub use forest::{build_forest, height_bound, validate_forest, FactorizationForest, ForestNode, ForestViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error("multiplication table must be {0}x{0} with entries below {0}")]
    BadTable(usize),
    #[error("not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NotAssociative(usize, usize, usize),
    #[error("letter `{0}` maps to element {1}, which does not exist")]
    BadImage(char, usize),
    #[error("letter `{0}` has no image")]
    UnknownLetter(char),
    #[error("the semigroup is not aperiodic")]
    NotAperiodic,
    #[error("the empty word has no image in a semigroup")]
    EmptyWord,
    #[error("type semigroup exceeds {0} elements")]
    TooLarge(usize),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("invalid semigroup file: {0}")]
    Json(String),
}

/// A finite semigroup on elements `0..size` given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semigroup {
    table: Vec<Vec<usize>>,
}

impl Semigroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, SemigroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(SemigroupError::BadTable(n));
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(SemigroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(Semigroup { table })
    }

    /// The semigroup of transformations of `0..states` generated by `gens`
    /// under composition (first apply the left factor, then the right).
    /// Returns the semigroup and the element index of each generator.
    pub fn from_transformations(states: usize, gens: &[Vec<usize>]) -> (Semigroup, Vec<usize>) {
        let mut elems: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut gen_ids = Vec::new();
        for g in gens {
            assert_eq!(g.len(), states);
            let id = *index.entry(g.clone()).or_insert_with(|| {
                elems.push(g.clone());
                queue.push_back(elems.len() - 1);
                elems.len() - 1
            });
            gen_ids.push(id);
        }
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let composed: Vec<usize> = (0..states).map(|q| g[elems[i][q]]).collect();
                if !index.contains_key(&composed) {
                    index.insert(composed.clone(), elems.len());
                    elems.push(composed);
                    queue.push_back(elems.len() - 1);
                }
            }
        }
        let table = elems
            .iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| index[&(0..states).map(|q| y[x[q]]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        (Semigroup::new(table).expect("composition is associative"), gen_ids)
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// `x^n = x^(n+1)` for every element, with `n` the number of elements.
    pub fn is_aperiodic(&self) -> bool {
        let n = self.size();
        (0..n).all(|x| {
            let mut p = x;
            for _ in 1..n {
                p = self.mul(p, x);
            }
            p == self.mul(p, x)
        })
    }

    /// The subsemigroup generated by `gens`.
    pub fn closure(&self, gens: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = gens.clone();
        let mut queue: Vec<usize> = gens.iter().copied().collect();
        while let Some(x) = queue.pop() {
            for &g in gens {
                for y in [self.mul(x, g), self.mul(g, x)] {
                    if out.insert(y) {
                        queue.push(y);
                    }
                }
            }
        }
        out
    }

    pub fn transposed(&self) -> Semigroup {
        let n = self.size();
        Semigroup { table: (0..n).map(|a| (0..n).map(|b| self.table[b][a]).collect()).collect() }
    }
}

pub fn is_aperiodic(s: &Semigroup) -> bool {
    s.is_aperiodic()
}

/// A homomorphism from nonempty words to a semigroup, given by letter images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    semigroup: Semigroup,
    images: BTreeMap<char, usize>,
    names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct HomomorphismFile {
    elements: usize,
    table: Vec<Vec<usize>>,
    letters: BTreeMap<char, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

impl Homomorphism {
    pub fn new(semigroup: Semigroup, images: BTreeMap<char, usize>) -> Result<Self, SemigroupError> {
        for (&c, &x) in &images {
            if x >= semigroup.size() {
                return Err(SemigroupError::BadImage(c, x));
            }
        }
        Ok(Homomorphism { semigroup, images, names: None })
    }

    /// Attaches display names for the elements.
    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.semigroup.size());
        self.names = Some(names);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, SemigroupError> {
        let f: HomomorphismFile = serde_json::from_str(text).map_err(|e| SemigroupError::Json(e.to_string()))?;
        if f.table.len() != f.elements {
            return Err(SemigroupError::BadTable(f.elements));
        }
        let h = Homomorphism::new(Semigroup::new(f.table)?, f.letters)?;
        Ok(match f.names {
            Some(n) if n.len() == f.elements => h.with_names(n),
            Some(_) => return Err(SemigroupError::Json("names must list every element".into())),
            None => h,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(HomomorphismFile {
            elements: self.semigroup.size(),
            table: self.semigroup.table.clone(),
            letters: self.images.clone(),
            names: self.names.clone(),
        })
        .expect("homomorphism serializes")
    }

    pub fn semigroup(&self) -> &Semigroup {
        &self.semigroup
    }

    pub fn alphabet(&self) -> Vec<char> {
        self.images.keys().copied().collect()
    }

    pub fn letter(&self, c: char) -> Result<usize, SemigroupError> {
        self.images.get(&c).copied().ok_or(SemigroupError::UnknownLetter(c))
    }

    pub fn element_name(&self, x: usize) -> String {
        match &self.names {
            Some(n) => n[x].clone(),
            None => x.to_string(),
        }
    }

    /// Left-to-right product of the letter images.
    pub fn image(&self, w: &str) -> Result<usize, SemigroupError> {
        let mut it = w.chars();
        let first = it.next().ok_or(SemigroupError::EmptyWord)?;
        it.try_fold(self.letter(first)?, |acc, c| Ok(self.semigroup.mul(acc, self.letter(c)?)))
    }
}

/// The semigroup of rank-`rank` types of nonempty words over `alphabet`,
/// with the homomorphism sending a word to its type. Elements are numbered
/// in discovery order; `representatives()[i]` is a shortest word of type `i`.
#[derive(Debug, Clone)]
pub struct TypeMonoid {
    pub homomorphism: Homomorphism,
    pub representatives: Vec<String>,
    pub rank: usize,
}

impl TypeMonoid {
    pub fn semigroup(&self) -> &Semigroup {
        self.homomorphism.semigroup()
    }
}

pub const DEFAULT_TYPE_MONOID_CAP: usize = 500;

/// Builds the type semigroup by closing the letters under right
/// multiplication by letters, deduplicating by rank-`rank` type.
pub fn type_monoid(alphabet: &[char], rank: usize) -> Result<TypeMonoid, SemigroupError> {
    type_monoid_capped(alphabet, rank, DEFAULT_TYPE_MONOID_CAP)
}

pub fn type_monoid_capped(alphabet: &[char], rank: usize, cap: usize) -> Result<TypeMonoid, SemigroupError> {
    let letters: BTreeSet<char> = alphabet.iter().copied().collect();
    assert!(!letters.is_empty(), "empty alphabet");
    let mut interner = TypeInterner::new();
    let type_of = |w: &str, interner: &mut TypeInterner| -> Result<TypeId, BudgetExceeded> {
        let m = ordered_model(w);
        interner.type_of(&mut TypeContext::new(&m), &[], rank)
    };
    let mut reps: Vec<String> = Vec::new();
    let mut index: HashMap<TypeId, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut add = |w: String, interner: &mut TypeInterner, reps: &mut Vec<String>, queue: &mut VecDeque<usize>| {
        let t = type_of(&w, interner)?;
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(t) {
            if reps.len() >= cap {
                return Err(SemigroupError::TooLarge(cap));
            }
            e.insert(reps.len());
            queue.push_back(reps.len());
            reps.push(w);
        }
        Ok::<usize, SemigroupError>(index[&t])
    };
    let mut images = BTreeMap::new();
    for &c in &letters {
        let id = add(c.to_string(), &mut interner, &mut reps, &mut queue)?;
        images.insert(c, id);
    }
    while let Some(i) = queue.pop_front() {
        for &c in &letters {
            let w = format!("{}{}", reps[i], c);
            add(w, &mut interner, &mut reps, &mut queue)?;
        }
    }
    let n = reps.len();
    let mut table = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let w = format!("{}{}", reps[i], reps[j]);
            let before = reps.len();
            table[i][j] = add(w, &mut interner, &mut reps, &mut queue)?;
            assert_eq!(before, reps.len(), "closure under letters reaches every type");
        }
    }
    let semigroup = Semigroup::new(table)?;
    let homomorphism = Homomorphism::new(semigroup, images)?;
    Ok(TypeMonoid { homomorphism, representatives: reps, rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_semigroup() -> Semigroup {
        Semigroup::new(vec![vec![0, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn aperiodicity() {
        assert!(min_semigroup().is_aperiodic());
        let z2 = Semigroup::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(!z2.is_aperiodic());
    }

    #[test]
    fn parity_language_is_not_aperiodic() {
        // minimal automaton of (aa)*: two states swapped by `a`
        let (s, gens) = Semigroup::from_transformations(2, &[vec![1, 0]]);
        assert_eq!(s.size(), 2);
        assert_eq!(gens, vec![0]);
        assert!(!s.is_aperiodic());
    }

    #[test]
    fn associativity_is_checked() {
        assert!(matches!(
            Semigroup::new(vec![vec![1, 0], vec![0, 0]]),
            Err(SemigroupError::NotAssociative(..))
        ));
        assert!(matches!(Semigroup::new(vec![vec![0, 2]]), Err(SemigroupError::BadTable(1))));
    }

    #[test]
    fn homomorphism_images_and_json() {
        let h = Homomorphism::new(min_semigroup(), BTreeMap::from([('a', 1), ('b', 0)])).unwrap();
        assert_eq!(h.image("aaa").unwrap(), 1);
        assert_eq!(h.image("aab").unwrap(), 0);
        assert_eq!(h.image(""), Err(SemigroupError::EmptyWord));
        assert_eq!(h.image("c"), Err(SemigroupError::UnknownLetter('c')));
        let back = Homomorphism::from_json(&h.to_json().to_string()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn small_type_monoids() {
        assert_eq!(type_monoid(&['a'], 0).unwrap().semigroup().size(), 1);
        let m = type_monoid(&['a', 'b'], 1).unwrap();
        assert_eq!(m.semigroup().size(), 3);
        assert!(m.semigroup().is_aperiodic());
    }
}
