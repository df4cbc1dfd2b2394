//! Executes a compiled automaton against a database.
//!
//! A frame is an automaton state plus a register file holding the concrete
//! values of the state's symbolic values. Each outgoing transition has its
//! label instantiated with the registers and looked up in the database; every
//! matching fact gives a successor frame whose registers are filled through
//! the transition's register map. The search is depth first with an explicit
//! stack and never expands the same frame twice, so cyclic data terminates.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::deduction::AnswerSet;
use crate::parteval::{Automaton, Origin, StateId};
use crate::program::Database;
use crate::symbol::Sym;
use crate::term::{Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("predicate `{0}` is used by the automaton but has no facts in the database")]
    UnknownPredicate(Sym),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub frames_expanded: usize,
    pub facts_fetched: usize,
    /// Distinct (state, register file) pairs reached.
    pub visited: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub answers: AnswerSet,
    pub stats: RunStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fail on label predicates missing from the database instead of
    /// treating them as empty relations.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Frame {
    state: StateId,
    registers: Vec<Sym>,
}

fn check_predicates(a: &Automaton, d: &Database, opts: RunOptions) -> Result<(), RuntimeError> {
    let mut seen = HashSet::new();
    for t in &a.transitions {
        let pred = t.label.pred;
        if d.has_predicate(pred) || !seen.insert(pred) {
            continue;
        }
        if opts.strict {
            return Err(RuntimeError::UnknownPredicate(pred));
        }
        log::warn!("predicate `{pred}` has no facts; treating it as empty");
    }
    Ok(())
}

fn bind(l: &Literal, registers: &[Sym]) -> Literal {
    l.map_terms(|t| match t {
        Term::Symbolic(i) => Term::Const(registers[i as usize]),
        t => t,
    })
}

/// Lazy answer stream. Answers come in depth-first discovery order, each
/// one at most once.
pub struct AnswerStream<'a> {
    automaton: &'a Automaton,
    db: &'a Database,
    stack: Vec<Frame>,
    visited: HashSet<Frame>,
    pending: VecDeque<Literal>,
    emitted: AnswerSet,
    stats: RunStats,
}

impl<'a> AnswerStream<'a> {
    fn new(a: &'a Automaton, d: &'a Database) -> AnswerStream<'a> {
        let start = Frame { state: a.initial(), registers: Vec::new() };
        AnswerStream {
            automaton: a,
            db: d,
            stack: vec![start.clone()],
            visited: HashSet::from([start]),
            pending: VecDeque::new(),
            emitted: AnswerSet::new(),
            stats: RunStats { visited: 1, ..RunStats::default() },
        }
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    fn expand(&mut self, frame: Frame) {
        self.stats.frames_expanded += 1;
        let a = self.automaton;
        if let Some(templates) = a.finals.get(&frame.state) {
            for t in templates {
                let fact = bind(t, &frame.registers);
                if self.emitted.insert(fact.clone()) {
                    self.pending.push_back(fact);
                }
            }
        }
        let mut children = Vec::new();
        for t in a.outgoing(frame.state) {
            let pattern = bind(&t.label, &frame.registers);
            for idx in self.db.lookup(&pattern) {
                self.stats.facts_fetched += 1;
                let fact = self.db.fact(idx);
                let registers = t
                    .registers
                    .origins()
                    .iter()
                    .map(|&o| match o {
                        Origin::Register(r) => frame.registers[r as usize],
                        Origin::Argument(pos) => match fact.args[pos] {
                            Term::Const(c) => c,
                            other => unreachable!("database fact with non-constant argument {other}"),
                        },
                    })
                    .collect();
                let child = Frame { state: t.target, registers };
                if self.visited.insert(child.clone()) {
                    children.push(child);
                }
            }
        }
        self.stats.visited = self.visited.len();
        // Reversed so the first transition and first matching fact are expanded first.
        self.stack.extend(children.into_iter().rev());
    }
}

impl Iterator for AnswerStream<'_> {
    type Item = Literal;

    fn next(&mut self) -> Option<Literal> {
        loop {
            if let Some(fact) = self.pending.pop_front() {
                return Some(fact);
            }
            let frame = self.stack.pop()?;
            self.expand(frame);
        }
    }
}

pub fn run_stream<'a>(a: &'a Automaton, d: &'a Database, opts: RunOptions) -> Result<AnswerStream<'a>, RuntimeError> {
    check_predicates(a, d, opts)?;
    Ok(AnswerStream::new(a, d))
}

pub fn run_with(a: &Automaton, d: &Database, opts: RunOptions) -> Result<RunResult, RuntimeError> {
    let mut stream = run_stream(a, d, opts)?;
    let answers = stream.by_ref().collect();
    Ok(RunResult { answers, stats: stream.stats() })
}

/// Runs with default options: missing predicates are empty relations.
pub fn run(a: &Automaton, d: &Database) -> RunResult {
    run_with(a, d, RunOptions::default()).expect("non-strict runs do not fail")
}
