//! S-expression reader for formulas.
//!
//! ```text
//! formula  := "true" | "false"
//!           | "(" letter var ")"
//!           | "(" rel var var ")"            rel in < = <= >= > != block< succ <@C =@C
//!           | "(in" var SETVAR ")"
//!           | "(not" formula ")" | "(and" formula* ")" | "(or" formula* ")"
//!           | "(implies" formula formula ")" | "(iff" formula formula ")"
//!           | "(" quant vars formula ")"      quant in exists forall
//!           | "(" squant SETVAR formula ")"   squant in existsS forallS
//! vars     := var | "(" var+ ")"
//! C        := factor | factor "." left "." right
//! ```
//!
//! First-order variables start with a lowercase letter or `_`, set variables
//! with an uppercase letter. `;` starts a comment running to the end of the line.

use super::{Coord, Formula, Logic};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: set variable `{name}` in a first-order formula")]
    SetVariableInFo { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut cur: Option<(String, usize, usize)> = None;
    let flush = |cur: &mut Option<(String, usize, usize)>, out: &mut Vec<Spanned>| {
        if let Some((s, l, c)) = cur.take() {
            out.push(Spanned { tok: Tok::Atom(s), line: l, col: c });
        }
    };
    while let Some(ch) = chars.next() {
        col += 1;
        match ch {
            '\n' => {
                flush(&mut cur, &mut out);
                line += 1;
                col = 0;
            }
            ';' => {
                flush(&mut cur, &mut out);
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' => {
                flush(&mut cur, &mut out);
                let tok = if ch == '(' { Tok::Open } else { Tok::Close };
                out.push(Spanned { tok, line, col });
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => match &mut cur {
                Some((s, _, _)) => s.push(c),
                None => cur = Some((c.to_string(), line, col)),
            },
        }
    }
    flush(&mut cur, &mut out);
    out
}

#[derive(Debug)]
enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }
}

fn err(pos: (usize, usize), msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line: pos.0, col: pos.1, msg: msg.into() }
}

fn read(toks: &[Spanned], i: &mut usize) -> Result<Sexp, ParseError> {
    let Some(t) = toks.get(*i) else {
        let pos = toks.last().map(|t| (t.line, t.col)).unwrap_or((1, 1));
        return Err(err(pos, "unexpected end of input"));
    };
    *i += 1;
    match &t.tok {
        Tok::Atom(s) => Ok(Sexp::Atom(s.clone(), t.line, t.col)),
        Tok::Close => Err(err((t.line, t.col), "unexpected `)`")),
        Tok::Open => {
            let mut items = Vec::new();
            loop {
                match toks.get(*i) {
                    None => return Err(err((t.line, t.col), "unclosed `(`")),
                    Some(Spanned { tok: Tok::Close, .. }) => {
                        *i += 1;
                        return Ok(Sexp::List(items, t.line, t.col));
                    }
                    Some(_) => items.push(read(toks, i)?),
                }
            }
        }
    }
}

/// Parses a formula; set quantifiers and membership are allowed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, Logic::Mso)
}

/// Parses a formula, rejecting set constructs when `logic` is [`Logic::Fo`].
pub fn parse_formula_with(text: &str, logic: Logic) -> Result<Formula, ParseError> {
    let toks = lex(text);
    if toks.is_empty() {
        return Err(err((1, 1), "empty formula"));
    }
    let mut i = 0;
    let sexp = read(&toks, &mut i)?;
    if let Some(t) = toks.get(i) {
        return Err(err((t.line, t.col), "trailing input after formula"));
    }
    Parser { logic }.formula(&sexp)
}

struct Parser {
    logic: Logic,
}

fn is_fo_var(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_lowercase() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '.'))
}

fn is_set_var(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_uppercase())
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '.'))
}

const KEYWORDS: &[&str] = &[
    "not", "and", "or", "implies", "iff", "exists", "forall", "existsS", "forallS", "in", "succ",
    "block<", "<", "=", "<=", ">=", ">", "!=", "true", "false",
];

impl Parser {
    fn fo_var(&self, s: &Sexp) -> Result<String, ParseError> {
        match s {
            Sexp::Atom(a, ..) if is_fo_var(a) && !KEYWORDS.contains(&a.as_str()) => Ok(a.clone()),
            Sexp::Atom(a, ..) if is_set_var(a) => {
                Err(err(s.pos(), format!("expected a first-order variable, found set variable `{a}`")))
            }
            _ => Err(err(s.pos(), "expected a first-order variable")),
        }
    }

    fn set_var(&self, s: &Sexp) -> Result<String, ParseError> {
        match s {
            Sexp::Atom(a, ..) if is_set_var(a) => {
                if self.logic == Logic::Fo {
                    let (line, col) = s.pos();
                    Err(ParseError::SetVariableInFo { line, col, name: a.clone() })
                } else {
                    Ok(a.clone())
                }
            }
            _ => Err(err(s.pos(), "expected a set variable (capitalized)")),
        }
    }

    fn formula(&self, s: &Sexp) -> Result<Formula, ParseError> {
        match s {
            Sexp::Atom(a, ..) => match a.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => Err(err(s.pos(), format!("unexpected atom `{a}`"))),
            },
            Sexp::List(items, ..) => {
                let Some(Sexp::Atom(head, ..)) = items.first() else {
                    return Err(err(s.pos(), "expected an operator at the head of a list"));
                };
                let args = &items[1..];
                let want = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(err(s.pos(), format!("`{head}` takes {n} argument(s), found {}", args.len())))
                    }
                };
                let binary = |build: fn(String, String) -> Formula| -> Result<Formula, ParseError> {
                    want(2)?;
                    Ok(build(self.fo_var(&args[0])?, self.fo_var(&args[1])?))
                };
                match head.as_str() {
                    "not" => {
                        want(1)?;
                        Ok(Formula::not(self.formula(&args[0])?))
                    }
                    "and" => Ok(Formula::And(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
                    "or" => Ok(Formula::Or(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
                    "implies" => {
                        want(2)?;
                        Ok(Formula::Or(vec![Formula::not(self.formula(&args[0])?), self.formula(&args[1])?]))
                    }
                    "iff" => {
                        want(2)?;
                        let a = self.formula(&args[0])?;
                        let b = self.formula(&args[1])?;
                        Ok(Formula::Or(vec![
                            Formula::And(vec![a.clone(), b.clone()]),
                            Formula::And(vec![Formula::not(a), Formula::not(b)]),
                        ]))
                    }
                    "exists" | "forall" => {
                        want(2)?;
                        let vars = match &args[0] {
                            Sexp::List(vs, ..) if !vs.is_empty() => {
                                vs.iter().map(|v| self.fo_var(v)).collect::<Result<Vec<_>, _>>()?
                            }
                            other => vec![self.fo_var(other)?],
                        };
                        let mut body = self.formula(&args[1])?;
                        for v in vars.into_iter().rev() {
                            body = if head == "exists" {
                                Formula::Exists(v, Box::new(body))
                            } else {
                                Formula::Forall(v, Box::new(body))
                            };
                        }
                        Ok(body)
                    }
                    "existsS" | "forallS" => {
                        want(2)?;
                        let v = self.set_var(&args[0])?;
                        let body = Box::new(self.formula(&args[1])?);
                        Ok(if head == "existsS" { Formula::ExistsSet(v, body) } else { Formula::ForallSet(v, body) })
                    }
                    "in" => {
                        want(2)?;
                        Ok(Formula::In(self.fo_var(&args[0])?, self.set_var(&args[1])?))
                    }
                    "<" => binary(Formula::Less),
                    "=" => binary(Formula::Equal),
                    "block<" => binary(Formula::BlockLess),
                    "succ" => binary(Formula::Succ),
                    ">" => binary(|v, w| Formula::Less(w, v)),
                    "<=" => binary(|v, w| Formula::Or(vec![Formula::Less(v.clone(), w.clone()), Formula::Equal(v, w)])),
                    ">=" => binary(|v, w| Formula::Or(vec![Formula::Less(w.clone(), v.clone()), Formula::Equal(v, w)])),
                    "!=" => binary(|v, w| Formula::not(Formula::Equal(v, w))),
                    h if h.starts_with("<@") || h.starts_with("=@") => {
                        let coord = parse_coord(&h[2..]).ok_or_else(|| err(s.pos(), format!("bad coordinate in `{h}`")))?;
                        want(2)?;
                        let (v, w) = (self.fo_var(&args[0])?, self.fo_var(&args[1])?);
                        Ok(if h.starts_with('<') { Formula::CoordLess(coord, v, w) } else { Formula::CoordEqual(coord, v, w) })
                    }
                    h if h.chars().count() == 1 => {
                        want(1)?;
                        Ok(Formula::Label(h.chars().next().unwrap(), self.fo_var(&args[0])?))
                    }
                    h => Err(err(s.pos(), format!("unknown operator `{h}`"))),
                }
            }
        }
    }
}

fn parse_coord(s: &str) -> Option<Coord> {
    let parts: Vec<usize> = s.split('.').map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let c = match parts.as_slice() {
        [f] => Coord { factor: *f, left: 1, right: 1 },
        [f, l, r] => Coord { factor: *f, left: *l, right: *r },
        _ => return None,
    };
    (c.factor >= 1 && c.left >= 1 && c.right >= 1).then_some(c)
}
