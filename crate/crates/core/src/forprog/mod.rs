//! For-programs: nested position loops, Boolean variables and output
//! instructions.
//!
//! ```text
//! program := ("input" var+)? stmt*
//! stmt    := "for" var ("up" | "down") block
//!          | "bool" NAME                      ; in scope for the rest of the block
//!          | NAME ":=" cond
//!          | "if" cond block ("else" block)?
//!          | "output" LETTER | "output_at" var
//!          | "output" "(" var ("," var)* ")"  ; also "output_tuple"
//!          | "return" cond
//! block   := "{" stmt* "}"
//! cond    := conj ("or" conj)*
//! conj    := neg ("and" neg)*
//! neg     := "not" neg | "true" | "false" | "(" cond ")"
//!          | LETTER "(" var ")" | var cmp var | NAME
//! cmp     := "<" | "<=" | ">" | ">=" | "=" | "!="
//! ```
//!
//! Boolean variables start out false each time their declaration runs, so a
//! declaration inside a loop body is reset on every iteration.

mod compile;
mod parse;
mod run;

use std::fmt;
use thiserror::Error;

pub use compile::compile_formula_to_program;
pub use parse::parse_program;
pub use run::{run_boolean, run_enumerator, run_program, run_traced, RunOutput};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("program mixes {0} and {1} output")]
    MixedModes(&'static str, &'static str),
    #[error("tuple outputs of different arity {0} and {1}")]
    MixedArity(usize, usize),
    #[error("`{0}` is not in scope")]
    Unbound(String),
    #[error("`{0}` is already in scope")]
    Shadowed(String),
    #[error("expected a {expected} program, found a {found} program")]
    WrongMode { expected: &'static str, found: &'static str },
    #[error("tuple {0:?} is output twice")]
    RepeatedTuple(Vec<usize>),
    #[error("program takes {expected} input positions, got {found}")]
    InputCount { expected: usize, found: usize },
    #[error("input position {pos} is outside 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("cannot compile `{0}` into a program")]
    Uncompilable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, a: usize, b: usize) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

/// A variable reference; `slot` is assigned when the program is resolved.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub slot: usize,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: name.to_string(), slot: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cond {
    True,
    False,
    Label(char, Var),
    Cmp(CmpOp, Var, Var),
    Bool(Var),
    Not(Box<Cond>),
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    For { var: Var, dir: Direction, body: Vec<Stmt> },
    /// Declares a Boolean, false, visible until the end of the enclosing block.
    Bool(Var),
    Assign(Var, Cond),
    If { cond: Cond, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    OutputLetter(char),
    OutputAt(Var),
    OutputTuple(Vec<Var>),
    Return(Cond),
}

/// What a program produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Letter,
    Tuple(usize),
    Boolean,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Letter => "letter",
            Mode::Tuple(_) => "tuple",
            Mode::Boolean => "boolean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ForProgram {
    pub inputs: Vec<Var>,
    pub body: Vec<Stmt>,
    mode: Mode,
    position_slots: usize,
    bool_slots: usize,
}

impl ForProgram {
    /// Resolves scopes and infers the mode.
    pub fn new(inputs: Vec<String>, body: Vec<Stmt>) -> Result<Self, ProgramError> {
        let mut p = ForProgram {
            inputs: inputs.iter().map(|n| Var::new(n)).collect(),
            body,
            mode: Mode::Letter,
            position_slots: 0,
            bool_slots: 0,
        };
        p.mode = infer_mode(&p.body, &p.inputs)?;
        let mut r = Resolver::default();
        for v in &mut p.inputs {
            r.bind_pos(v)?;
        }
        let mut body = std::mem::take(&mut p.body);
        r.block(&mut body)?;
        p.body = body;
        p.position_slots = r.max_pos;
        p.bool_slots = r.max_bool;
        Ok(p)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub(crate) fn slots(&self) -> (usize, usize) {
        (self.position_slots, self.bool_slots)
    }
}

fn infer_mode(body: &[Stmt], inputs: &[Var]) -> Result<Mode, ProgramError> {
    fn walk(stmts: &[Stmt], found: &mut Option<Mode>) -> Result<(), ProgramError> {
        for s in stmts {
            let m = match s {
                Stmt::For { body, .. } => {
                    walk(body, found)?;
                    continue;
                }
                Stmt::If { then, otherwise, .. } => {
                    walk(then, found)?;
                    walk(otherwise, found)?;
                    continue;
                }
                Stmt::OutputLetter(_) | Stmt::OutputAt(_) => Mode::Letter,
                Stmt::OutputTuple(vs) => Mode::Tuple(vs.len()),
                Stmt::Return(_) => Mode::Boolean,
                Stmt::Bool(_) | Stmt::Assign(..) => continue,
            };
            match *found {
                None => *found = Some(m),
                Some(Mode::Tuple(a)) if matches!(m, Mode::Tuple(b) if b != a) => {
                    let Mode::Tuple(b) = m else { unreachable!() };
                    return Err(ProgramError::MixedArity(a, b));
                }
                Some(prev) if std::mem::discriminant(&prev) != std::mem::discriminant(&m) => {
                    return Err(ProgramError::MixedModes(prev.name(), m.name()));
                }
                _ => {}
            }
        }
        Ok(())
    }
    let mut found = None;
    walk(body, &mut found)?;
    Ok(match found {
        Some(m) => m,
        None if !inputs.is_empty() => Mode::Boolean,
        None => Mode::Letter,
    })
}

#[derive(Default)]
struct Resolver {
    positions: Vec<String>,
    bools: Vec<String>,
    max_pos: usize,
    max_bool: usize,
}

impl Resolver {
    fn bind_pos(&mut self, v: &mut Var) -> Result<(), ProgramError> {
        if self.positions.contains(&v.name) {
            return Err(ProgramError::Shadowed(v.name.clone()));
        }
        v.slot = self.positions.len();
        self.positions.push(v.name.clone());
        self.max_pos = self.max_pos.max(self.positions.len());
        Ok(())
    }

    fn pos(&self, v: &mut Var) -> Result<(), ProgramError> {
        v.slot = self.positions.iter().rposition(|n| *n == v.name).ok_or_else(|| ProgramError::Unbound(v.name.clone()))?;
        Ok(())
    }

    fn boolean(&self, v: &mut Var) -> Result<(), ProgramError> {
        v.slot = self.bools.iter().rposition(|n| *n == v.name).ok_or_else(|| ProgramError::Unbound(v.name.clone()))?;
        Ok(())
    }

    fn cond(&self, c: &mut Cond) -> Result<(), ProgramError> {
        match c {
            Cond::True | Cond::False => Ok(()),
            Cond::Label(_, v) => self.pos(v),
            Cond::Cmp(_, a, b) => {
                self.pos(a)?;
                self.pos(b)
            }
            Cond::Bool(v) => self.boolean(v),
            Cond::Not(c) => self.cond(c),
            Cond::And(cs) | Cond::Or(cs) => cs.iter_mut().try_for_each(|c| self.cond(c)),
        }
    }

    fn block(&mut self, stmts: &mut [Stmt]) -> Result<(), ProgramError> {
        let (np, nb) = (self.positions.len(), self.bools.len());
        for s in stmts.iter_mut() {
            match s {
                Stmt::For { var, body, .. } => {
                    self.bind_pos(var)?;
                    self.block(body)?;
                    self.positions.pop();
                }
                Stmt::Bool(v) => {
                    if self.positions.contains(&v.name) {
                        return Err(ProgramError::Shadowed(v.name.clone()));
                    }
                    v.slot = self.bools.len();
                    self.bools.push(v.name.clone());
                    self.max_bool = self.max_bool.max(self.bools.len());
                }
                Stmt::Assign(v, c) => {
                    self.boolean(v)?;
                    self.cond(c)?;
                }
                Stmt::If { cond, then, otherwise } => {
                    self.cond(cond)?;
                    self.block(then)?;
                    self.block(otherwise)?;
                }
                Stmt::OutputLetter(_) => {}
                Stmt::OutputAt(v) => self.pos(v)?,
                Stmt::OutputTuple(vs) => vs.iter_mut().try_for_each(|v| self.pos(v))?,
                Stmt::Return(c) => self.cond(c)?,
            }
        }
        self.positions.truncate(np);
        self.bools.truncate(nb);
        Ok(())
    }
}

/// True iff every Boolean assignment is `P := true`.
pub fn check_first_order(p: &ForProgram) -> bool {
    fn ok(stmts: &[Stmt]) -> bool {
        stmts.iter().all(|s| match s {
            Stmt::Assign(_, c) => *c == Cond::True,
            Stmt::For { body, .. } => ok(body),
            Stmt::If { then, otherwise, .. } => ok(then) && ok(otherwise),
            _ => true,
        })
    }
    ok(&p.body)
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl Cond {
    /// Precedence: 0 = or, 1 = and, 2 = operand.
    fn write(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Cond::True => write!(f, "true"),
            Cond::False => write!(f, "false"),
            Cond::Label(c, v) => write!(f, "{c}({})", v.name),
            Cond::Cmp(op, a, b) => write!(f, "{} {} {}", a.name, op.symbol(), b.name),
            Cond::Bool(v) => write!(f, "{}", v.name),
            Cond::Not(c) => {
                write!(f, "not ")?;
                c.write(f, 2)
            }
            Cond::And(cs) | Cond::Or(cs) => {
                let (mine, word, empty) = match self {
                    Cond::And(_) => (1, "and", "true"),
                    _ => (0, "or", "false"),
                };
                if cs.is_empty() {
                    return write!(f, "{empty}");
                }
                if cs.len() == 1 {
                    return cs[0].write(f, prec);
                }
                let paren = prec > mine;
                if paren {
                    write!(f, "(")?;
                }
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {word} ")?;
                    }
                    c.write(f, mine + 1)?;
                }
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::For { var, dir, body } => {
                let d = if *dir == Direction::Up { "up" } else { "down" };
                writeln!(f, "{pad}for {} {d} {{", var.name)?;
                write_block(f, body, depth + 1)?;
                writeln!(f, "{pad}}}")?;
            }
            Stmt::Bool(v) => writeln!(f, "{pad}bool {}", v.name)?,
            Stmt::Assign(v, c) => writeln!(f, "{pad}{} := {c}", v.name)?,
            Stmt::If { cond, then, otherwise } => {
                writeln!(f, "{pad}if {cond} {{")?;
                write_block(f, then, depth + 1)?;
                if otherwise.is_empty() {
                    writeln!(f, "{pad}}}")?;
                } else {
                    writeln!(f, "{pad}}} else {{")?;
                    write_block(f, otherwise, depth + 1)?;
                    writeln!(f, "{pad}}}")?;
                }
            }
            Stmt::OutputLetter(c) => writeln!(f, "{pad}output {c}")?,
            Stmt::OutputAt(v) => writeln!(f, "{pad}output_at {}", v.name)?,
            Stmt::OutputTuple(vs) => {
                let names: Vec<&str> = vs.iter().map(|v| v.name.as_str()).collect();
                writeln!(f, "{pad}output ({})", names.join(","))?
            }
            Stmt::Return(c) => writeln!(f, "{pad}return {c}")?,
        }
    }
    Ok(())
}

impl fmt::Display for ForProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.inputs.is_empty() {
            let names: Vec<&str> = self.inputs.iter().map(|v| v.name.as_str()).collect();
            writeln!(f, "input {}", names.join(" "))?;
        }
        write_block(f, &self.body, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "for x up {\n  bool P\n  for y down {\n    if x < y {\n      P := not P\n    }\n  }\n  if not P {\n    output_at x\n  }\n}\n";

    #[test]
    fn modes_and_first_order_check() {
        let id = parse_program("for x up { output_at x }").unwrap();
        assert_eq!(id.mode(), Mode::Letter);
        assert!(check_first_order(&id));
        let fig2 = parse_program(FIG2).unwrap();
        assert!(!check_first_order(&fig2));
        let e = parse_program("for x1 up { for x2 down { if x2<=x1 { output (x1,x2) } } }").unwrap();
        assert_eq!(e.mode(), Mode::Tuple(2));
        assert_eq!(parse_program("input x\nreturn a(x)").unwrap().mode(), Mode::Boolean);
    }

    #[test]
    fn printer_round_trips() {
        let p = parse_program(FIG2).unwrap();
        assert_eq!(p.to_string(), FIG2);
        let q = parse_program("input x1 x2\nbool P\nfor z up { if x1 < z and z < x2 and a(z) { P := true } }\nreturn P").unwrap();
        assert_eq!(parse_program(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            parse_program("for x up { output a output (x) }").unwrap_err(),
            ProgramError::MixedModes("letter", "tuple")
        );
        assert_eq!(parse_program("output_at x").unwrap_err(), ProgramError::Unbound("x".into()));
        assert_eq!(parse_program("for x up { for x down { } }").unwrap_err(), ProgramError::Shadowed("x".into()));
        assert_eq!(parse_program("for x up { bool P } P := true").unwrap_err(), ProgramError::Unbound("P".into()));
        assert!(matches!(parse_program("for x sideways { }"), Err(ProgramError::Syntax { line: 1, col: 7, .. })));
    }
}
