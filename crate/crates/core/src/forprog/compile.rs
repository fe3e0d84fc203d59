use std::collections::{BTreeSet, HashMap};

use super::{CmpOp, Cond, Direction, ForProgram, ProgramError, Stmt, Var};
use crate::logic::{Formula, NameSupply};

/// Compiles a first-order formula into a Boolean program whose inputs are
/// `inputs`. Each quantifier becomes a loop together with a Boolean that is
/// only ever set to true: a witness for `exists`, a counterexample for
/// `forall`.
pub fn compile_formula_to_program(f: &Formula, inputs: &[String]) -> Result<ForProgram, ProgramError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !inputs.contains(v)) {
        return Err(ProgramError::Unbound(v));
    }
    let mut reserved: BTreeSet<String> = f.all_names();
    reserved.extend(inputs.iter().cloned());
    let mut c = Compiler { supply: NameSupply::new(reserved.iter().cloned()), reserved, scope: inputs.to_vec(), next_bool: 0 };
    let env: HashMap<String, String> = inputs.iter().map(|v| (v.clone(), v.clone())).collect();
    let mut body = Vec::new();
    let cond = c.cond(f, &env, &mut body)?;
    body.push(Stmt::Return(cond));
    ForProgram::new(inputs.to_vec(), body)
}

struct Compiler {
    supply: NameSupply,
    reserved: BTreeSet<String>,
    scope: Vec<String>,
    next_bool: usize,
}

impl Compiler {
    fn fresh_bool(&mut self) -> String {
        loop {
            self.next_bool += 1;
            let name = format!("P{}", self.next_bool);
            if !self.reserved.contains(&name) {
                self.supply.reserve(&name);
                return name;
            }
        }
    }

    fn position_name(&mut self, v: &str) -> String {
        if self.scope.iter().any(|s| s == v) {
            self.supply.fresh(v)
        } else {
            v.to_string()
        }
    }

    fn var(env: &HashMap<String, String>, v: &str) -> Var {
        Var::new(env.get(v).map(String::as_str).unwrap_or(v))
    }

    /// Appends whatever statements the condition needs to `out`.
    fn cond(&mut self, f: &Formula, env: &HashMap<String, String>, out: &mut Vec<Stmt>) -> Result<Cond, ProgramError> {
        Ok(match f {
            Formula::True => Cond::True,
            Formula::False => Cond::False,
            Formula::Label(a, v) => Cond::Label(*a, Self::var(env, v)),
            Formula::Less(v, w) => Cond::Cmp(CmpOp::Lt, Self::var(env, v), Self::var(env, w)),
            Formula::Equal(v, w) => Cond::Cmp(CmpOp::Eq, Self::var(env, v), Self::var(env, w)),
            Formula::Succ(v, w) => {
                let mut names = f.all_names();
                names.extend(env.keys().cloned());
                let z = NameSupply::new(names).fresh("z");
                let gap = Formula::exists(&z, Formula::And(vec![Formula::less(v, &z), Formula::less(&z, w)]));
                let expanded = Formula::And(vec![Formula::less(v, w), Formula::not(gap)]);
                self.cond(&expanded, env, out)?
            }
            Formula::Not(g) => Cond::Not(Box::new(self.cond(g, env, out)?)),
            Formula::And(gs) => Cond::And(gs.iter().map(|g| self.cond(g, env, out)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Cond::Or(gs.iter().map(|g| self.cond(g, env, out)).collect::<Result<_, _>>()?),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let exists = matches!(f, Formula::Exists(..));
                let flag = self.fresh_bool();
                out.push(Stmt::Bool(Var::new(&flag)));
                let name = self.position_name(v);
                let mut inner = env.clone();
                inner.insert(v.clone(), name.clone());
                self.scope.push(name.clone());
                let mut body = Vec::new();
                let c = self.cond(g, &inner, &mut body)?;
                self.scope.pop();
                let test = if exists { c } else { Cond::Not(Box::new(c)) };
                body.push(Stmt::If { cond: test, then: vec![Stmt::Assign(Var::new(&flag), Cond::True)], otherwise: vec![] });
                out.push(Stmt::For { var: Var::new(&name), dir: Direction::Up, body });
                let found = Cond::Bool(Var::new(&flag));
                if exists {
                    found
                } else {
                    Cond::Not(Box::new(found))
                }
            }
            Formula::BlockLess(..)
            | Formula::In(..)
            | Formula::CoordLess(..)
            | Formula::CoordEqual(..)
            | Formula::ExistsSet(..)
            | Formula::ForallSet(..) => return Err(ProgramError::Uncompilable(f.to_string())),
        })
    }
}
