//! Terms over the signature of an algebra, their text form and evaluation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::algebra::{Element, FiniteAlgebra, OperationTable};
use crate::error::{Error, Result};

/// A term tree: variables `x0, x1, ..` and applications of operation symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Var(index)
    }

    pub fn apply(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply(symbol.into(), args)
    }

    /// One more than the largest variable index, or 0 for a ground term.
    pub fn variable_bound(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Apply(_, args) => args.iter().map(Term::variable_bound).max().unwrap_or(0),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Apply(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Apply(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Replaces every `x{i}` by `values[i]`.
    pub fn substitute(&self, values: &[Term]) -> Result<Term> {
        match self {
            Term::Var(i) => values.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: *i,
                len: values.len(),
            }),
            Term::Apply(s, args) => Ok(Term::Apply(
                s.clone(),
                args.iter()
                    .map(|a| a.substitute(values))
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }

    /// Checks symbols and arities against `alg` and that variables stay below `vars`.
    pub fn check(&self, alg: &FiniteAlgebra, vars: usize) -> Result<()> {
        CompiledTerm::compile(alg, self, vars).map(|_| ())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{}", i),
            Term::Apply(s, args) => {
                write!(f, "({}", s)?;
                for a in args {
                    write!(f, " {}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Term> {
        let mut p = Parser { src: s, pos: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input after term"));
        }
        Ok(t)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn token(&mut self) -> &str {
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        match self.src[self.pos..].chars().next() {
            None => Err(self.error("unexpected end of input")),
            Some(')') => Err(self.error("unexpected `)`")),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let start = self.pos;
                let symbol = self.token().to_string();
                if symbol.is_empty() {
                    self.pos = start;
                    return Err(self.error("expected an operation symbol"));
                }
                let mut args = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src[self.pos..].chars().next() {
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Term::Apply(symbol, args));
                        }
                        None => return Err(self.error("missing `)`")),
                        _ => args.push(self.term()?),
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                let tok = self.token();
                let index = tok
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok());
                match index {
                    Some(i) => Ok(Term::Var(i)),
                    None => {
                        let tok = String::from(tok);
                        self.pos = start;
                        Err(self.error(&format!("expected a variable like x0, found `{}`", tok)))
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Instr {
    Var(usize),
    Op(usize),
}

/// A term resolved against an algebra and flattened to postfix order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledTerm {
    code: Vec<Instr>,
    vars: usize,
    depth: usize,
}

impl CompiledTerm {
    /// Resolves symbols of `t`; variables must be below `vars`.
    pub fn compile(alg: &FiniteAlgebra, t: &Term, vars: usize) -> Result<CompiledTerm> {
        let mut code = Vec::new();
        let mut depth = 0;
        emit(alg, t, vars, &mut code, 0, &mut depth)?;
        Ok(CompiledTerm { code, vars, depth })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Evaluates with a caller-provided stack to avoid allocation in hot loops.
    pub fn eval_with(&self, alg: &FiniteAlgebra, assignment: &[Element], stack: &mut Vec<Element>) -> Element {
        let m = alg.size();
        stack.clear();
        for ins in &self.code {
            match *ins {
                Instr::Var(i) => stack.push(assignment[i]),
                Instr::Op(o) => {
                    let op = alg.operation(o);
                    let k = op.arity();
                    let base = stack.len() - k;
                    let v = op.apply(m, &stack[base..]);
                    stack.truncate(base);
                    stack.push(v);
                }
            }
        }
        stack[0]
    }

    pub fn eval(&self, alg: &FiniteAlgebra, assignment: &[Element]) -> Element {
        let mut stack = Vec::with_capacity(self.depth + 1);
        self.eval_with(alg, assignment, &mut stack)
    }

    /// The induced term operation of arity `self.vars()` as a table.
    pub fn tabulate(&self, alg: &FiniteAlgebra, symbol: impl Into<String>) -> OperationTable {
        let mut stack = Vec::new();
        OperationTable::from_fn(symbol, self.vars, alg.size(), |a| self.eval_with(alg, a, &mut stack))
    }
}

fn emit(
    alg: &FiniteAlgebra,
    t: &Term,
    vars: usize,
    code: &mut Vec<Instr>,
    height: usize,
    depth: &mut usize,
) -> Result<()> {
    *depth = (*depth).max(height + 1);
    match t {
        Term::Var(i) => {
            if *i >= vars {
                return Err(Error::VariableOutOfRange { index: *i, len: vars });
            }
            code.push(Instr::Var(*i));
        }
        Term::Apply(s, args) => {
            let o = alg.op_index(s).ok_or_else(|| Error::UnknownSymbol(s.clone()))?;
            let arity = alg.operation(o).arity();
            if arity != args.len() {
                return Err(Error::ArityMismatch {
                    symbol: s.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            for (j, a) in args.iter().enumerate() {
                emit(alg, a, vars, code, height + j, depth)?;
            }
            code.push(Instr::Op(o));
        }
    }
    Ok(())
}

/// Value of the term operation of `t` at `assignment`.
pub fn eval_term(alg: &FiniteAlgebra, t: &Term, assignment: &[Element]) -> Result<Element> {
    if let Some(&a) = assignment.iter().find(|&&a| a as usize >= alg.size()) {
        return Err(Error::OutOfBounds(format!("element {} in a carrier of {}", a, alg.size())));
    }
    Ok(CompiledTerm::compile(alg, t, assignment.len())?.eval(alg, assignment))
}

/// `x{i}` for `i < n`.
pub fn variables(n: usize) -> Vec<Term> {
    (0..n).map(Term::Var).collect()
}

/// Convenience for building nested applications in tests and the zoo.
pub fn app<const K: usize>(symbol: &str, args: [Term; K]) -> Term {
    Term::Apply(String::from(symbol), Vec::from(args))
}
