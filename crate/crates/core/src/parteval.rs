//! Compilation of a program into a finite automaton by running the deduction
//! method on symbolic values instead of data.
//!
//! Each selected EDB literal of a state labels a transition. Taking the
//! transition replaces the label's variables with fresh symbolic values and
//! computes the successor state from that symbolic fact. States equal up to a
//! renaming of symbolic values are fused, which is decided by comparing
//! canonical forms. At run time the symbolic values of a state become
//! registers; each transition carries a [`RegisterMap`] saying where the
//! registers of the target state get their values.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::deduction::{initial_state, selected_edb_literals, successor_state, EngineMode};
use crate::normalize::{canonicalize, Schema, SchemaCollision, State};
use crate::program::{answer_sym, Program};
use crate::term::{Literal, Rule, Term};

pub type StateId = usize;

/// Default bound on the number of automaton states.
pub const DEFAULT_STATE_CAP: usize = 10_000;

/// Where a register of the target state takes its value from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    /// A register of the source state.
    Register(u32),
    /// An argument position of the fact matched by the label.
    Argument(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Register(r) => write!(f, "$c{r}"),
            Origin::Argument(i) => write!(f, "#{i}"),
        }
    }
}

/// Register assignment of a transition, indexed by target register.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RegisterMap {
    assign: Vec<Origin>,
}

impl RegisterMap {
    pub fn new(assign: Vec<Origin>) -> RegisterMap {
        RegisterMap { assign }
    }

    pub fn origins(&self) -> &[Origin] {
        &self.assign
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }
}

impl fmt::Display for RegisterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, o) in self.assign.iter().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "$c{j}={o}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    /// EDB literal over constants, source registers (`$c<i>`) and variables.
    pub label: Literal,
    pub registers: RegisterMap,
    pub target: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub mode: EngineMode,
    /// Canonical states; state 0 is initial.
    pub states: Vec<State>,
    /// Sorted by source, then label order of the source state.
    pub transitions: Vec<Transition>,
    /// `answer` templates of each final state.
    pub finals: BTreeMap<StateId, Vec<Literal>>,
}

impl Automaton {
    pub fn initial(&self) -> StateId {
        0
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.contains_key(&s)
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.source == s)
    }

    /// Number of registers of state `s`.
    pub fn registers(&self, s: StateId) -> usize {
        self.states[s].symbolic_count()
    }

    /// The unique target of `label` (compared up to variable names) from `s`.
    pub fn delta(&self, s: StateId, label: &Literal) -> Option<StateId> {
        let label = normalize_label(label);
        self.outgoing(s).find(|t| t.label == label).map(|t| t.target)
    }
}

/// `answer` facts of a state, i.e. its answer templates.
pub fn answer_templates(s: &State) -> Vec<Literal> {
    let answer = answer_sym();
    s.iter().filter(|r| r.head.pred == answer && r.is_fact()).map(|r| r.head.clone()).collect()
}

fn normalize_label(l: &Literal) -> Literal {
    crate::normalize::normalize(&Rule::fact(l.clone())).head
}

/// Transition labels of a state: its distinct selected EDB literals.
pub fn symbolic_labels(s: &State, p: &Program) -> Vec<Literal> {
    selected_edb_literals(s.iter(), p)
}

/// Valid iff the rules' schemata are pairwise distinct.
pub fn is_valid(s: &State) -> bool {
    s.is_valid()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("successor of a state by `{label}` is invalid: {collision}")]
pub struct InvalidState {
    pub label: Literal,
    /// The successor before canonicalization.
    pub state: State,
    pub collision: SchemaCollision,
}

/// Successor of `s` for the symbolic fact obtained from `label`, in
/// canonical form, with the register map of the transition. `None` if the
/// label reduces no rule of `s`.
pub fn symbolic_successor(
    s: &State,
    label: &Literal,
    p: &Program,
    mode: EngineMode,
) -> Result<Option<(State, RegisterMap)>, InvalidState> {
    let fresh = s.max_symbolic().map_or(0, |m| m + 1);
    let fact = label.map_terms(|t| match t {
        Term::Var(v) => Term::Symbolic(fresh + v),
        t => t,
    });
    let Some(next) = successor_state(s, &fact, p, mode) else {
        return Ok(None);
    };
    let canonical = canonicalize(&next).map_err(|collision| InvalidState {
        label: label.clone(),
        state: next.clone(),
        collision,
    })?;
    let mut assign = vec![Origin::Register(0); canonical.renaming.len()];
    for (&old, &new) in &canonical.renaming {
        assign[new as usize] = if old < fresh {
            Origin::Register(old)
        } else {
            let var = old - fresh;
            let pos = label
                .args
                .iter()
                .position(|&t| t == Term::Var(var))
                .unwrap_or_else(|| unreachable!("fresh symbolic value $c{old} does not come from the label"));
            Origin::Argument(pos)
        };
    }
    Ok(Some((canonical.state, RegisterMap::new(assign))))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(
        "invalid state reached after {}: rules `{first}` and `{second}` share the schema `{schema}`",
        describe_path(path)
    )]
    InvalidState {
        /// Transitions from the initial state to the offending state.
        path: Vec<(StateId, Literal)>,
        state: State,
        first: Rule,
        second: Rule,
        schema: Schema,
    },
    #[error("state limit of {cap} exceeded")]
    StateCap { cap: usize },
}

fn describe_path(path: &[(StateId, Literal)]) -> String {
    if path.is_empty() {
        return "no transitions".into();
    }
    path.iter().map(|(s, l)| format!("S{s} --{l}-->")).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: EngineMode,
    pub cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { mode: EngineMode::Extended, cap: DEFAULT_STATE_CAP }
    }
}

pub fn compile(p: &Program, mode: EngineMode) -> Result<Automaton, CompileError> {
    compile_with(p, CompileOptions { mode, ..CompileOptions::default() })
}

pub fn compile_with(p: &Program, opts: CompileOptions) -> Result<Automaton, CompileError> {
    let initial =
        canonicalize(&initial_state(p, opts.mode)).expect("states without symbolic values are always valid").state;
    let mut states = vec![initial.clone()];
    let mut ids: HashMap<State, StateId> = HashMap::from([(initial, 0)]);
    let mut parent: Vec<Option<(StateId, Literal)>> = vec![None];
    let mut transitions = Vec::new();
    let mut queue = VecDeque::from([0]);

    let path_to = |parent: &[Option<(StateId, Literal)>], mut s: StateId| {
        let mut path = Vec::new();
        while let Some((src, label)) = &parent[s] {
            path.push((*src, label.clone()));
            s = *src;
        }
        path.reverse();
        path
    };

    while let Some(id) = queue.pop_front() {
        let state = states[id].clone();
        for label in symbolic_labels(&state, p) {
            let (next, registers) = match symbolic_successor(&state, &label, p, opts.mode) {
                Ok(Some(found)) => found,
                Ok(None) => continue,
                Err(e) => {
                    let mut path = path_to(&parent, id);
                    path.push((id, label));
                    return Err(CompileError::InvalidState {
                        path,
                        state: e.state,
                        first: e.collision.first,
                        second: e.collision.second,
                        schema: e.collision.schema,
                    });
                }
            };
            let target = match ids.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= opts.cap {
                        return Err(CompileError::StateCap { cap: opts.cap });
                    }
                    let t = states.len();
                    ids.insert(next.clone(), t);
                    states.push(next);
                    parent.push(Some((id, label.clone())));
                    queue.push_back(t);
                    t
                }
            };
            transitions.push(Transition { source: id, label, registers, target });
        }
    }

    transitions.sort_by_key(|t| t.source);
    let finals = states
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let templates = answer_templates(s);
            (!templates.is_empty()).then_some((i, templates))
        })
        .collect();
    Ok(Automaton { mode: opts.mode, states, transitions, finals })
}
