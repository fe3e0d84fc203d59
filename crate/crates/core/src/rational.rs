//! Unambiguous rational transducers and chaining of string functions.
//!
//! A transducer is a nondeterministic automaton whose transitions carry an
//! input letter and an output string. It defines a function on the words that
//! admit exactly one accepting run.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forprog::{run_program, ForProgram, ProgramError};
use crate::interpretation::{evaluate_interpretation, Interpretation, InterpretationError};

#[derive(Debug, Error)]
pub enum RationalError {
    #[error("invalid transducer JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("transition input `{0}` is not a single letter")]
    BadInput(String),
    #[error("letter-to-letter transition outputs `{0}`")]
    NotLetterToLetter(String),
    #[error("no accepting run on `{0}`")]
    NoRun(String),
    #[error("{runs} accepting runs on `{word}`")]
    Ambiguous { word: String, runs: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub input: char,
    pub output: String,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTransducer {
    states: Vec<String>,
    initial: Vec<bool>,
    accepting: Vec<bool>,
    transitions: Vec<Transition>,
    letter_to_letter: bool,
    /// Outgoing transitions per state.
    by_source: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TransducerJson {
    states: Vec<String>,
    initial: Vec<String>,
    #[serde(rename = "final")]
    accepting: Vec<String>,
    /// `[from, input letter, output string, to]`.
    transitions: Vec<(String, String, String, String)>,
    #[serde(default)]
    letter_to_letter: bool,
}

impl RationalTransducer {
    pub fn new(
        states: Vec<String>,
        initial: &[usize],
        accepting: &[usize],
        transitions: Vec<Transition>,
        letter_to_letter: bool,
    ) -> Result<Self, RationalError> {
        let n = states.len();
        let bad = |q: usize| RationalError::UnknownState(q.to_string());
        let mut init = vec![false; n];
        for &q in initial {
            *init.get_mut(q).ok_or_else(|| bad(q))? = true;
        }
        let mut fin = vec![false; n];
        for &q in accepting {
            *fin.get_mut(q).ok_or_else(|| bad(q))? = true;
        }
        let mut by_source = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            if t.to >= n {
                return Err(bad(t.to));
            }
            by_source.get_mut(t.from).ok_or_else(|| bad(t.from))?.push(i);
            if letter_to_letter && t.output.chars().count() != 1 {
                return Err(RationalError::NotLetterToLetter(t.output.clone()));
            }
        }
        Ok(RationalTransducer { states, initial: init, accepting: fin, transitions, letter_to_letter, by_source })
    }

    pub fn from_json(text: &str) -> Result<Self, RationalError> {
        let j: TransducerJson = serde_json::from_str(text)?;
        let index: BTreeMap<&str, usize> = j.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let look = |s: &str| index.get(s).copied().ok_or_else(|| RationalError::UnknownState(s.to_string()));
        let initial = j.initial.iter().map(|s| look(s)).collect::<Result<Vec<_>, _>>()?;
        let accepting = j.accepting.iter().map(|s| look(s)).collect::<Result<Vec<_>, _>>()?;
        let mut transitions = Vec::new();
        for (from, input, output, to) in &j.transitions {
            let mut cs = input.chars();
            let (Some(c), None) = (cs.next(), cs.next()) else {
                return Err(RationalError::BadInput(input.clone()));
            };
            transitions.push(Transition { from: look(from)?, input: c, output: output.clone(), to: look(to)? });
        }
        Self::new(j.states.clone(), &initial, &accepting, transitions, j.letter_to_letter)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pick = |flags: &[bool]| -> Vec<String> {
            flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.states[i].clone()).collect()
        };
        let j = TransducerJson {
            states: self.states.clone(),
            initial: pick(&self.initial),
            accepting: pick(&self.accepting),
            transitions: self
                .transitions
                .iter()
                .map(|t| (self.states[t.from].clone(), t.input.to_string(), t.output.clone(), self.states[t.to].clone()))
                .collect(),
            letter_to_letter: self.letter_to_letter,
        };
        serde_json::to_value(j).expect("transducer serializes")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn is_letter_to_letter(&self) -> bool {
        self.letter_to_letter
    }

    pub fn input_alphabet(&self) -> BTreeSet<char> {
        self.transitions.iter().map(|t| t.input).collect()
    }

    pub fn output_alphabet(&self) -> BTreeSet<char> {
        self.transitions.iter().flat_map(|t| t.output.chars()).collect()
    }

    /// Forward run counts per prefix length and state, saturating at `cap`.
    fn forward(&self, w: &[char], cap: u64) -> Vec<Vec<u64>> {
        let mut layers = vec![self.initial.iter().map(|&b| b as u64).collect::<Vec<_>>()];
        for &c in w {
            let prev = layers.last().unwrap();
            let mut next = vec![0u64; self.states.len()];
            for (q, &n) in prev.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                for &ti in &self.by_source[q] {
                    let t = &self.transitions[ti];
                    if t.input == c {
                        next[t.to] = (next[t.to] + n).min(cap);
                    }
                }
            }
            layers.push(next);
        }
        layers
    }

    /// Number of accepting runs on `w`, saturating at `cap`.
    pub fn count_runs(&self, w: &str, cap: u64) -> u64 {
        let chars: Vec<char> = w.chars().collect();
        let last = self.forward(&chars, cap).pop().unwrap();
        last.iter().zip(&self.accepting).filter(|(_, &f)| f).fold(0, |acc, (&n, _)| (acc + n).min(cap))
    }
}

/// The output along the unique accepting run on `w`.
pub fn eval_rational(t: &RationalTransducer, w: &str) -> Result<String, RationalError> {
    let chars: Vec<char> = w.chars().collect();
    let layers = t.forward(&chars, 2);
    let last = &layers[chars.len()];
    let runs: u64 = last.iter().zip(&t.accepting).filter(|(_, &f)| f).map(|(&n, _)| n).sum();
    match runs {
        0 => return Err(RationalError::NoRun(w.to_string())),
        1 => {}
        runs => return Err(RationalError::Ambiguous { word: w.to_string(), runs }),
    }
    let mut q = (0..t.states.len()).find(|&q| t.accepting[q] && last[q] == 1).unwrap();
    let mut pieces = Vec::with_capacity(chars.len());
    for i in (0..chars.len()).rev() {
        let ti = t
            .transitions
            .iter()
            .position(|tr| tr.to == q && tr.input == chars[i] && layers[i][tr.from] > 0)
            .expect("a run with count one has a predecessor");
        pieces.push(t.transitions[ti].output.as_str());
        q = t.transitions[ti].from;
    }
    Ok(pieces.into_iter().rev().collect())
}

/// True iff every nonempty word over the input alphabet of length at most
/// `max_len` has exactly one accepting run.
pub fn check_unambiguous(t: &RationalTransducer, max_len: usize) -> bool {
    let alphabet: Vec<char> = t.input_alphabet().into_iter().collect();
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |&c| format!("{w}{c}"))).collect();
        if layer.iter().any(|w| t.count_runs(w, 2) != 1) {
            return false;
        }
    }
    true
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Interpretation(#[from] InterpretationError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("letter `{0}` is outside the input alphabet")]
    UnknownLetter(char),
    #[error("stage {index} failed: {source}")]
    InStage { index: usize, source: Box<StageError> },
}

/// The result of one application: the output and, per stage, whether the
/// stage's input was shorter than two letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageOutput {
    pub word: String,
    pub short_input: Vec<bool>,
}

/// A string-to-string function over fixed alphabets.
pub trait StringFunction: Send + Sync {
    fn input_alphabet(&self) -> BTreeSet<char>;
    fn output_alphabet(&self) -> BTreeSet<char>;
    fn apply(&self, w: &str) -> Result<StageOutput, StageError>;
}

impl StringFunction for RationalTransducer {
    fn input_alphabet(&self) -> BTreeSet<char> {
        RationalTransducer::input_alphabet(self)
    }

    fn output_alphabet(&self) -> BTreeSet<char> {
        RationalTransducer::output_alphabet(self)
    }

    fn apply(&self, w: &str) -> Result<StageOutput, StageError> {
        Ok(StageOutput { word: eval_rational(self, w)?, short_input: vec![w.chars().count() < 2] })
    }
}

impl StringFunction for Interpretation {
    fn input_alphabet(&self) -> BTreeSet<char> {
        self.input_alphabet.iter().copied().collect()
    }

    fn output_alphabet(&self) -> BTreeSet<char> {
        self.output_alphabet.iter().copied().collect()
    }

    fn apply(&self, w: &str) -> Result<StageOutput, StageError> {
        let e = evaluate_interpretation(self, w)?;
        Ok(StageOutput { word: e.output, short_input: vec![e.below_threshold] })
    }
}

/// A letter-output for-program together with its alphabets.
#[derive(Clone, Debug)]
pub struct ProgramFunction {
    pub program: ForProgram,
    pub input: BTreeSet<char>,
    pub output: BTreeSet<char>,
}

impl StringFunction for ProgramFunction {
    fn input_alphabet(&self) -> BTreeSet<char> {
        self.input.clone()
    }

    fn output_alphabet(&self) -> BTreeSet<char> {
        self.output.clone()
    }

    fn apply(&self, w: &str) -> Result<StageOutput, StageError> {
        if let Some(c) = w.chars().find(|c| !self.input.contains(c)) {
            return Err(StageError::UnknownLetter(c));
        }
        Ok(StageOutput { word: run_program(&self.program, w)?, short_input: vec![w.chars().count() < 2] })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("stage {stage} may output {missing:?}, which stage {} does not read", stage + 1)]
pub struct AlphabetMismatch {
    pub stage: usize,
    pub missing: Vec<char>,
}

/// Left-to-right composition of stages; with no stages, the identity on
/// `alphabet`.
#[derive(Clone)]
pub struct Chain {
    alphabet: BTreeSet<char>,
    stages: Vec<Arc<dyn StringFunction>>,
}

impl Chain {
    pub fn new(alphabet: BTreeSet<char>, stages: Vec<Arc<dyn StringFunction>>) -> Result<Self, AlphabetMismatch> {
        let mut current = alphabet.clone();
        for (i, s) in stages.iter().enumerate() {
            let accepts = s.input_alphabet();
            let missing: Vec<char> = current.difference(&accepts).copied().collect();
            if !missing.is_empty() {
                return Err(AlphabetMismatch { stage: i, missing });
            }
            current = s.output_alphabet();
        }
        Ok(Chain { alphabet, stages })
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Chains non-empty `stages`, reading the first stage's input alphabet.
pub fn chain(stages: Vec<Arc<dyn StringFunction>>) -> Result<Chain, AlphabetMismatch> {
    let alphabet = stages.first().map(|s| s.input_alphabet()).unwrap_or_default();
    Chain::new(alphabet, stages)
}

impl StringFunction for Chain {
    fn input_alphabet(&self) -> BTreeSet<char> {
        self.alphabet.clone()
    }

    fn output_alphabet(&self) -> BTreeSet<char> {
        self.stages.last().map(|s| s.output_alphabet()).unwrap_or_else(|| self.alphabet.clone())
    }

    fn apply(&self, w: &str) -> Result<StageOutput, StageError> {
        if let Some(c) = w.chars().find(|c| !self.alphabet.contains(c)) {
            return Err(StageError::UnknownLetter(c));
        }
        let mut out = StageOutput { word: w.to_string(), short_input: Vec::new() };
        for (index, s) in self.stages.iter().enumerate() {
            let r = s.apply(&out.word).map_err(|e| StageError::InStage { index, source: Box::new(e) })?;
            out.word = r.word;
            out.short_input.extend(r.short_input);
        }
        Ok(out)
    }
}
