//! Naive bottom-up evaluation: iterate the immediate-consequence operator
//! from the database facts until nothing new is derived.
//!
//! This is deliberately independent of the deduction machinery (its own
//! matcher, no unifier, no normalization) so that it can serve as ground
//! truth in tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::deduction::AnswerSet;
use crate::program::{answer_sym, true_sym, Database, Program};
use crate::symbol::Sym;
use crate::term::{Literal, Rule, Term};

/// A set of ground facts grouped by predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactSet {
    by_pred: BTreeMap<Sym, BTreeSet<Vec<Sym>>>,
    rounds: usize,
}

impl FactSet {
    pub fn insert(&mut self, fact: &Literal) -> bool {
        let args: Option<Vec<Sym>> = fact
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(*c),
                _ => None,
            })
            .collect();
        let args = args.expect("facts in a FactSet are ground");
        self.by_pred.entry(fact.pred).or_default().insert(args)
    }

    pub fn contains(&self, fact: &Literal) -> bool {
        let Some(rows) = self.by_pred.get(&fact.pred) else {
            return false;
        };
        let args: Vec<Sym> = fact
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(*c),
                _ => None,
            })
            .collect();
        args.len() == fact.arity() && rows.contains(&args)
    }

    pub fn len(&self) -> usize {
        self.by_pred.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterations of the consequence operator needed to reach the fixpoint.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.by_pred.iter().flat_map(|(&pred, rows)| {
            rows.iter().map(move |row| Literal { pred, args: row.iter().map(|&c| Term::Const(c)).collect() })
        })
    }

    fn rows(&self, pred: Sym) -> impl Iterator<Item = &Vec<Sym>> {
        self.by_pred.get(&pred).into_iter().flatten()
    }
}

/// Extends `binding` so that `lit` matches `row`, or returns `None`.
fn match_row(lit: &Literal, row: &[Sym], binding: &HashMap<u32, Sym>) -> Option<HashMap<u32, Sym>> {
    if lit.args.len() != row.len() {
        return None;
    }
    let mut b = binding.clone();
    for (t, &value) in lit.args.iter().zip(row) {
        match t {
            Term::Const(c) if *c == value => {}
            Term::Var(v) => match b.get(v) {
                Some(&bound) if bound != value => return None,
                Some(_) => {}
                None => {
                    b.insert(*v, value);
                }
            },
            _ => return None,
        }
    }
    Some(b)
}

fn consequences(rule: &Rule, facts: &FactSet, out: &mut Vec<Literal>) {
    let mut bindings = vec![HashMap::new()];
    for lit in &rule.body {
        let mut next = Vec::new();
        for b in &bindings {
            for row in facts.rows(lit.pred) {
                if let Some(extended) = match_row(lit, row, b) {
                    next.push(extended);
                }
            }
        }
        bindings = next;
        if bindings.is_empty() {
            return;
        }
    }
    for b in bindings {
        let args = rule
            .head
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Const(b[v]),
                t => *t,
            })
            .collect();
        out.push(Literal { pred: rule.head.pred, args });
    }
}

/// The least set of facts containing the database and closed under all
/// program and goal rules.
pub fn fixpoint(p: &Program, d: &Database) -> FactSet {
    let mut facts = FactSet::default();
    facts.insert(&Literal { pred: true_sym(), args: Vec::new() });
    for f in d.iter() {
        facts.insert(f);
    }
    let rules: Vec<&Rule> = p.all_rules().collect();
    loop {
        facts.rounds += 1;
        let mut derived = Vec::new();
        for r in &rules {
            consequences(r, &facts, &mut derived);
        }
        let mut next = facts.clone();
        let mut changed = false;
        for f in &derived {
            changed |= next.insert(f);
        }
        facts = next;
        if !changed {
            return facts;
        }
    }
}

pub fn answers_of(f: &FactSet) -> AnswerSet {
    let answer = answer_sym();
    f.iter().filter(|l| l.pred == answer).collect()
}

/// Shorthand for `answers_of(&fixpoint(p, d))`.
pub fn oracle_answers(p: &Program, d: &Database) -> AnswerSet {
    answers_of(&fixpoint(p, d))
}
