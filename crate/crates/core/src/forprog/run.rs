use std::collections::HashSet;

use super::{Cond, Direction, ForProgram, Mode, ProgramError, Stmt};

/// Everything a run produced. Positions are 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub letters: String,
    pub tuples: Vec<Vec<usize>>,
    pub returned: Option<bool>,
    pub trace: Vec<String>,
}

enum Flow {
    Next,
    Return(bool),
}

struct Machine<'a> {
    word: &'a [char],
    pos: Vec<usize>,
    bools: Vec<bool>,
    out: RunOutput,
    tracing: bool,
    depth: usize,
}

impl Machine<'_> {
    fn note(&mut self, line: impl FnOnce() -> String) {
        if self.tracing {
            let pad = "  ".repeat(self.depth);
            self.out.trace.push(format!("{pad}{}", line()));
        }
    }

    fn cond(&self, c: &Cond) -> bool {
        match c {
            Cond::True => true,
            Cond::False => false,
            Cond::Label(a, v) => self.word[self.pos[v.slot] - 1] == *a,
            Cond::Cmp(op, a, b) => op.holds(self.pos[a.slot], self.pos[b.slot]),
            Cond::Bool(v) => self.bools[v.slot],
            Cond::Not(c) => !self.cond(c),
            Cond::And(cs) => cs.iter().all(|c| self.cond(c)),
            Cond::Or(cs) => cs.iter().any(|c| self.cond(c)),
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Flow {
        for s in stmts {
            if let Flow::Return(b) = self.stmt(s) {
                return Flow::Return(b);
            }
        }
        Flow::Next
    }

    fn stmt(&mut self, s: &Stmt) -> Flow {
        match s {
            Stmt::For { var, dir, body } => {
                let n = self.word.len();
                let order: Box<dyn Iterator<Item = usize>> = match dir {
                    Direction::Up => Box::new(1..=n),
                    Direction::Down => Box::new((1..=n).rev()),
                };
                for i in order {
                    self.pos[var.slot] = i;
                    self.note(|| format!("for {} = {i}", var.name));
                    self.depth += 1;
                    let flow = self.block(body);
                    self.depth -= 1;
                    if let Flow::Return(b) = flow {
                        return Flow::Return(b);
                    }
                }
            }
            Stmt::Bool(v) => {
                self.bools[v.slot] = false;
                self.note(|| format!("bool {}", v.name));
            }
            Stmt::Assign(v, c) => {
                let b = self.cond(c);
                self.bools[v.slot] = b;
                self.note(|| format!("{} := {b}", v.name));
            }
            Stmt::If { cond, then, otherwise } => {
                let b = self.cond(cond);
                self.note(|| format!("if {cond} -> {b}"));
                self.depth += 1;
                let flow = self.block(if b { then } else { otherwise });
                self.depth -= 1;
                return flow;
            }
            Stmt::OutputLetter(c) => {
                self.out.letters.push(*c);
                self.note(|| format!("output {c}"));
            }
            Stmt::OutputAt(v) => {
                let c = self.word[self.pos[v.slot] - 1];
                self.out.letters.push(c);
                self.note(|| format!("output {c}"));
            }
            Stmt::OutputTuple(vs) => {
                let t: Vec<usize> = vs.iter().map(|v| self.pos[v.slot]).collect();
                self.note(|| format!("output {t:?}"));
                self.out.tuples.push(t);
            }
            Stmt::Return(c) => {
                let b = self.cond(c);
                self.note(|| format!("return {b}"));
                return Flow::Return(b);
            }
        }
        Flow::Next
    }
}

/// Runs any program, binding its inputs to the given 1-based positions.
pub fn run_traced(p: &ForProgram, word: &str, inputs: &[usize], trace: bool) -> Result<RunOutput, ProgramError> {
    let chars: Vec<char> = word.chars().collect();
    if inputs.len() != p.inputs.len() {
        return Err(ProgramError::InputCount { expected: p.inputs.len(), found: inputs.len() });
    }
    if let Some(&pos) = inputs.iter().find(|&&i| i == 0 || i > chars.len()) {
        return Err(ProgramError::PositionOutOfRange { pos, len: chars.len() });
    }
    let (np, nb) = p.slots();
    let mut m = Machine { word: &chars, pos: vec![0; np], bools: vec![false; nb], out: RunOutput::default(), tracing: trace, depth: 0 };
    m.pos[..inputs.len()].copy_from_slice(inputs);
    if let Flow::Return(b) = m.block(&p.body) {
        m.out.returned = Some(b);
    }
    Ok(m.out)
}

fn expect_mode(p: &ForProgram, ok: bool, expected: &'static str) -> Result<(), ProgramError> {
    if ok {
        Ok(())
    } else {
        Err(ProgramError::WrongMode { expected, found: p.mode().name() })
    }
}

/// Runs a letter-output program and returns the output word.
pub fn run_program(p: &ForProgram, word: &str) -> Result<String, ProgramError> {
    expect_mode(p, p.mode() == Mode::Letter, "letter")?;
    Ok(run_traced(p, word, &[], false)?.letters)
}

/// Runs a tuple-output program; every tuple must be output at most once.
pub fn run_enumerator(p: &ForProgram, word: &str) -> Result<Vec<Vec<usize>>, ProgramError> {
    expect_mode(p, matches!(p.mode(), Mode::Tuple(_)), "tuple")?;
    let tuples = run_traced(p, word, &[], false)?.tuples;
    let mut seen = HashSet::new();
    for t in &tuples {
        if !seen.insert(t) {
            return Err(ProgramError::RepeatedTuple(t.clone()));
        }
    }
    Ok(tuples)
}

/// Runs a Boolean program; finishing without `return` yields false.
pub fn run_boolean(p: &ForProgram, word: &str, inputs: &[usize]) -> Result<bool, ProgramError> {
    expect_mode(p, p.mode() == Mode::Boolean, "boolean")?;
    Ok(run_traced(p, word, inputs, false)?.returned.unwrap_or(false))
}
