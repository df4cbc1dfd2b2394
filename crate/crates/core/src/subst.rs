//! Substitutions, most general unifiers and variable renaming.
//!
//! There are no function symbols, so unification only ever binds variables to
//! variables or to constants/symbolic values and needs no occurs check.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Literal, Rule, Term};

/// A finite map from variable indices to terms.
///
/// Substitutions built by [`unify`] are idempotent: no bound variable occurs
/// in the image of any binding.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<u32, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Term)>) -> Substitution {
        Substitution { bindings: pairs.into_iter().collect() }
    }

    pub fn get(&self, var: u32) -> Option<Term> {
        self.bindings.get(&var).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Term)> + '_ {
        self.bindings.iter().map(|(&v, &t)| (v, t))
    }

    pub fn is_idempotent(&self) -> bool {
        self.bindings.values().all(|t| t.as_var().is_none_or(|v| !self.bindings.contains_key(&v)))
    }

    pub fn apply_term(&self, t: Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(&v).copied().unwrap_or(t),
            _ => t,
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        l.map_terms(|t| self.apply_term(t))
    }

    pub fn apply_rule(&self, r: &Rule) -> Rule {
        r.map_terms(|t| self.apply_term(t))
    }

    /// The substitution that behaves like applying `self` and then `after`.
    pub fn then(&self, after: &Substitution) -> Substitution {
        let mut bindings: BTreeMap<u32, Term> = self.bindings.iter().map(|(&v, &t)| (v, after.apply_term(t))).collect();
        for (&v, &t) in &after.bindings {
            bindings.entry(v).or_insert(t);
        }
        bindings.retain(|&v, t| *t != Term::Var(v));
        Substitution { bindings }
    }

    fn walk(&self, mut t: Term) -> Term {
        while let Term::Var(v) = t {
            match self.bindings.get(&v) {
                Some(&next) => t = next,
                None => break,
            }
        }
        t
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "X{v}/{t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of two literals, or `None` if they do not unify.
pub fn unify(a: &Literal, b: &Literal) -> Option<Substitution> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    for (&x, &y) in a.args.iter().zip(&b.args) {
        let x = s.walk(x);
        let y = s.walk(y);
        if x == y {
            continue;
        }
        match (x, y) {
            (Term::Var(u), Term::Var(w)) => {
                let (from, to) = if u > w { (u, w) } else { (w, u) };
                s.bindings.insert(from, Term::Var(to));
            }
            (Term::Var(u), t) | (t, Term::Var(u)) => {
                s.bindings.insert(u, t);
            }
            _ => return None,
        }
    }
    let resolved: BTreeMap<u32, Term> = s.bindings.keys().map(|&v| (v, s.walk(Term::Var(v)))).collect();
    Some(Substitution { bindings: resolved })
}

/// A variant of `r` whose variables avoid every index in `forbidden`.
///
/// Variables are shifted past the largest forbidden index, so an empty
/// forbidden set returns `r` unchanged.
pub fn rename_apart(r: &Rule, forbidden: impl IntoIterator<Item = u32>) -> Rule {
    match forbidden.into_iter().max() {
        Some(max) => shift_vars(r, max + 1),
        None => r.clone(),
    }
}

pub(crate) fn shift_vars(r: &Rule, offset: u32) -> Rule {
    if offset == 0 {
        return r.clone();
    }
    r.map_terms(|t| match t {
        Term::Var(v) => Term::Var(v + offset),
        t => t,
    })
}

pub(crate) fn shift_literal(l: &Literal, offset: u32) -> Literal {
    l.map_terms(|t| match t {
        Term::Var(v) => Term::Var(v + offset),
        t => t,
    })
}

/// Whether two literals taken from different rules unify, i.e. after their
/// variables have been separated.
pub fn unifiable_apart(a: &Literal, b: &Literal) -> bool {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return false;
    }
    let offset = a.vars().max().map_or(0, |m| m + 1);
    unify(a, &shift_literal(b, offset)).is_some()
}
