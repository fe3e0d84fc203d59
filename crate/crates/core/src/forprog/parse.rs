use super::{CmpOp, Cond, Direction, ForProgram, ProgramError, Stmt, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Punct(&'static str),
    Word(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: &[&str] = &[":=", "<=", ">=", "!=", "{", "}", "(", ")", ",", "<", ">", "="];

fn punct_at(chars: &[char], i: usize) -> Option<&'static str> {
    PUNCT.iter().copied().find(|p| p.chars().enumerate().all(|(j, c)| chars.get(i + j) == Some(&c)))
}

fn lex(text: &str) -> Vec<Spanned> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if let Some(p) = punct_at(&chars, i) {
            out.push(Spanned { tok: Tok::Punct(p), line, col });
            i += p.len();
            col += p.len();
            continue;
        }
        let start = col;
        let mut w = String::new();
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '#' || punct_at(&chars, i).is_some() {
                break;
            }
            w.push(c);
            i += 1;
            col += 1;
        }
        out.push(Spanned { tok: Tok::Word(w), line, col: start });
    }
    out
}

/// Parses a program; `#` starts a comment.
pub fn parse_program(text: &str) -> Result<ForProgram, ProgramError> {
    let toks = lex(text);
    let mut p = Parser { toks, i: 0 };
    let mut inputs = Vec::new();
    if p.peek_word() == Some("input") {
        p.i += 1;
        while let Some(w) = p.peek_word() {
            if is_keyword(w) || p.peek_at(1).is_some_and(|t| t.tok == Tok::Punct(":=")) {
                break;
            }
            let w = w.to_string();
            if !is_ident(&w) {
                return Err(p.err("expected an input variable"));
            }
            inputs.push(w);
            p.i += 1;
        }
        if inputs.is_empty() {
            return Err(p.err("`input` needs at least one variable"));
        }
    }
    let body = p.stmts(false)?;
    ForProgram::new(inputs, body)
}

const KEYWORDS: &[&str] =
    &["for", "up", "down", "bool", "if", "else", "output", "output_at", "output_tuple", "return", "not", "and", "or", "true", "false", "input"];

fn is_keyword(w: &str) -> bool {
    KEYWORDS.contains(&w)
}

fn is_ident(w: &str) -> bool {
    !is_keyword(w)
        && w.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && w.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.i)
    }

    fn peek_at(&self, off: usize) -> Option<&Spanned> {
        self.toks.get(self.i + off)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Spanned { tok: Tok::Word(w), .. }) => Some(w),
            _ => None,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ProgramError {
        let (line, col) = match self.peek().or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        ProgramError::Syntax { line, col, msg: msg.into() }
    }

    fn punct(&mut self, p: &'static str) -> Result<(), ProgramError> {
        match self.peek() {
            Some(Spanned { tok: Tok::Punct(q), .. }) if *q == p => {
                self.i += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{p}`"))),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn word(&mut self) -> Result<String, ProgramError> {
        match self.peek_word() {
            Some(w) => {
                let w = w.to_string();
                self.i += 1;
                Ok(w)
            }
            None => Err(self.err("expected a word")),
        }
    }

    fn ident(&mut self) -> Result<String, ProgramError> {
        match self.peek_word() {
            Some(w) if is_ident(w) => self.word(),
            _ => Err(self.err("expected a variable name")),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ProgramError> {
        self.punct("{")?;
        let body = self.stmts(true)?;
        self.punct("}")?;
        Ok(body)
    }

    fn stmts(&mut self, nested: bool) -> Result<Vec<Stmt>, ProgramError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None if nested => return Err(self.err("unclosed `{`")),
                None => return Ok(out),
                Some(Spanned { tok: Tok::Punct("}"), .. }) if nested => return Ok(out),
                _ => out.push(self.stmt()?),
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ProgramError> {
        let w = match self.peek_word() {
            Some(w) => w.to_string(),
            None => return Err(self.err("expected a statement")),
        };
        match w.as_str() {
            "for" => {
                self.i += 1;
                let var = Var::new(&self.ident()?);
                let dir = match self.peek_word() {
                    Some("up") => Direction::Up,
                    Some("down") => Direction::Down,
                    _ => return Err(self.err("expected `up` or `down`")),
                };
                self.i += 1;
                Ok(Stmt::For { var, dir, body: self.block()? })
            }
            "bool" => {
                self.i += 1;
                Ok(Stmt::Bool(Var::new(&self.ident()?)))
            }
            "if" => {
                self.i += 1;
                let cond = self.cond()?;
                let then = self.block()?;
                let otherwise = if self.peek_word() == Some("else") {
                    self.i += 1;
                    if self.peek_word() == Some("if") {
                        vec![self.stmt()?]
                    } else {
                        self.block()?
                    }
                } else {
                    Vec::new()
                };
                Ok(Stmt::If { cond, then, otherwise })
            }
            "output" | "output_tuple" => {
                self.i += 1;
                if self.is_punct("(") {
                    self.i += 1;
                    let mut vars = vec![Var::new(&self.ident()?)];
                    while self.is_punct(",") {
                        self.i += 1;
                        vars.push(Var::new(&self.ident()?));
                    }
                    self.punct(")")?;
                    return Ok(Stmt::OutputTuple(vars));
                }
                if w == "output_tuple" {
                    return Err(self.err("expected `(`"));
                }
                let letter = self.word()?;
                let mut cs = letter.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok(Stmt::OutputLetter(c)),
                    _ => {
                        self.i -= 1;
                        Err(self.err("`output` takes a single letter or a tuple"))
                    }
                }
            }
            "output_at" => {
                self.i += 1;
                Ok(Stmt::OutputAt(Var::new(&self.ident()?)))
            }
            "return" => {
                self.i += 1;
                Ok(Stmt::Return(self.cond()?))
            }
            _ if is_ident(&w) => {
                self.i += 1;
                self.punct(":=")?;
                Ok(Stmt::Assign(Var::new(&w), self.cond()?))
            }
            _ => Err(self.err(format!("unexpected `{w}`"))),
        }
    }

    fn cond(&mut self) -> Result<Cond, ProgramError> {
        let mut parts = vec![self.conj()?];
        while self.peek_word() == Some("or") {
            self.i += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Cond::Or(parts) })
    }

    fn conj(&mut self) -> Result<Cond, ProgramError> {
        let mut parts = vec![self.neg()?];
        while self.peek_word() == Some("and") {
            self.i += 1;
            parts.push(self.neg()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Cond::And(parts) })
    }

    fn neg(&mut self) -> Result<Cond, ProgramError> {
        if self.is_punct("(") {
            self.i += 1;
            let c = self.cond()?;
            self.punct(")")?;
            return Ok(c);
        }
        let w = self.word()?;
        match w.as_str() {
            "not" => return Ok(Cond::Not(Box::new(self.neg()?))),
            "true" => return Ok(Cond::True),
            "false" => return Ok(Cond::False),
            _ => {}
        }
        if self.is_punct("(") {
            let mut cs = w.chars();
            let (Some(letter), None) = (cs.next(), cs.next()) else {
                return Err(self.err("a label test needs a single letter"));
            };
            self.i += 1;
            let v = Var::new(&self.ident()?);
            self.punct(")")?;
            return Ok(Cond::Label(letter, v));
        }
        let op = match self.peek() {
            Some(Spanned { tok: Tok::Punct(p), .. }) => match *p {
                "<" => Some(CmpOp::Lt),
                "<=" => Some(CmpOp::Le),
                ">" => Some(CmpOp::Gt),
                ">=" => Some(CmpOp::Ge),
                "=" => Some(CmpOp::Eq),
                "!=" => Some(CmpOp::Ne),
                _ => None,
            },
            _ => None,
        };
        if !is_ident(&w) {
            self.i -= 1;
            return Err(self.err(format!("unexpected `{w}` in a condition")));
        }
        match op {
            Some(op) => {
                self.i += 1;
                Ok(Cond::Cmp(op, Var::new(&w), Var::new(&self.ident()?)))
            }
            None => Ok(Cond::Bool(Var::new(&w))),
        }
    }
}
