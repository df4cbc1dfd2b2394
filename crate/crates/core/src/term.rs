//! Terms, literals and rules.

use std::collections::BTreeSet;
use std::fmt;

use crate::symbol::Sym;

/// A variable, a program/database constant, or a symbolic value standing for
/// a data value that is only known at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    Const(Sym),
    Symbolic(u32),
}

impl Term {
    pub fn constant(text: &str) -> Term {
        Term::Const(Sym::intern(text))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }
}

/// An atomic formula `p(t1, ..., tm)`. The arity is the argument count.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: &str, args: Vec<Term>) -> Literal {
        Literal { pred: Sym::intern(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn symbolics(&self) -> impl Iterator<Item = u32> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Symbolic(c) => Some(*c),
            _ => None,
        })
    }

    pub fn map_terms(&self, mut f: impl FnMut(Term) -> Term) -> Literal {
        Literal { pred: self.pred, args: self.args.iter().map(|&t| f(t)).collect() }
    }
}

/// `head :- body`. A fact is a rule with an empty body and no variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Literal, body: Vec<Literal>) -> Rule {
        Rule { head, body }
    }

    pub fn fact(head: Literal) -> Rule {
        Rule { head, body: Vec::new() }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty() && self.head.is_ground()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        std::iter::once(&self.head).chain(self.body.iter())
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.literals().flat_map(Literal::vars).collect()
    }

    pub fn max_var(&self) -> Option<u32> {
        self.literals().flat_map(Literal::vars).max()
    }

    pub fn symbolics(&self) -> BTreeSet<u32> {
        self.literals().flat_map(Literal::symbolics).collect()
    }

    pub fn is_range_restricted(&self) -> bool {
        let body: BTreeSet<u32> = self.body.iter().flat_map(Literal::vars).collect();
        self.head.vars().all(|v| body.contains(&v))
    }

    pub fn map_terms(&self, mut f: impl FnMut(Term) -> Term) -> Rule {
        Rule { head: self.head.map_terms(&mut f), body: self.body.iter().map(|l| l.map_terms(&mut f)).collect() }
    }
}

/// Whether `text` can be printed as a bare constant without quoting.
pub(crate) fn is_bare_constant(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if c.is_ascii_digit() || c == '-' => {
            let digits = if c == '-' { &text[1..] } else { text };
            !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
        }
        _ => false,
    }
}

pub(crate) fn write_constant(f: &mut fmt::Formatter<'_>, sym: Sym) -> fmt::Result {
    let text = sym.as_str();
    if is_bare_constant(text) {
        return f.write_str(text);
    }
    f.write_str("\"")?;
    for c in text.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

/// Prefix used when printing symbolic values: `$c0` in states, `$b0` in schemata.
#[derive(Clone, Copy)]
pub(crate) struct SymbolicStyle(pub char);

pub(crate) fn write_term(f: &mut fmt::Formatter<'_>, t: Term, style: SymbolicStyle) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "X{v}"),
        Term::Const(c) => write_constant(f, c),
        Term::Symbolic(c) => write!(f, "${}{c}", style.0),
    }
}

pub(crate) fn write_literal(f: &mut fmt::Formatter<'_>, l: &Literal, style: SymbolicStyle) -> fmt::Result {
    f.write_str(l.pred.as_str())?;
    if l.args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, &t) in l.args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write_term(f, t, style)?;
    }
    f.write_str(")")
}

pub(crate) fn write_rule(f: &mut fmt::Formatter<'_>, r: &Rule, style: SymbolicStyle) -> fmt::Result {
    write_literal(f, &r.head, style)?;
    for (i, l) in r.body.iter().enumerate() {
        f.write_str(if i == 0 { " :- " } else { ", " })?;
        write_literal(f, l, style)?;
    }
    f.write_str(".")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, *self, SymbolicStyle('c'))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_literal(f, self, SymbolicStyle('c'))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self, SymbolicStyle('c'))
    }
}
