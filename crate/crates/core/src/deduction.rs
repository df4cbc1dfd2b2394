//! Earley Deduction over concrete databases.
//!
//! A state is a set of normalized rules. The initial state holds the goal
//! rules and everything derivable from them by instantiation ("calling" IDB
//! predicates). A transition consumes one EDB fact: rules whose selected
//! literal matches are reduced, derived IDB facts reduce the rules waiting
//! for them, new calls are instantiated, and rules that still wait on a
//! pending derivation are copied over.
//!
//! In [`EngineMode::Extended`], a rule whose only remaining body literal is an
//! IDB call is resolved directly against the program rules instead of being
//! instantiated (last literal resolution). This keeps tail recursion from
//! accumulating arbitrarily long chains of waiting rules.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::normalize::{normalize, State};
use crate::program::{answer_sym, Database, Program};
use crate::subst::{shift_vars, unifiable_apart, unify};
use crate::term::{Literal, Rule};

/// Chooses the body literal of a rule that is processed next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectionFunction {
    #[default]
    Leftmost,
}

impl SelectionFunction {
    pub fn select(self, r: &Rule) -> Option<usize> {
        match self {
            SelectionFunction::Leftmost if !r.body.is_empty() => Some(0),
            SelectionFunction::Leftmost => None,
        }
    }
}

const SELECTION: SelectionFunction = SelectionFunction::Leftmost;

/// The selected body literal of `r`, if it has a body.
pub fn selected(r: &Rule) -> Option<&Literal> {
    SELECTION.select(r).map(|i| &r.body[i])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EngineMode {
    Basic,
    #[default]
    Extended,
}

impl fmt::Display for EngineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineMode::Basic => "basic",
            EngineMode::Extended => "extended",
        })
    }
}

impl FromStr for EngineMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(EngineMode::Basic),
            "extended" => Ok(EngineMode::Extended),
            other => Err(format!("unknown mode `{other}` (expected `basic` or `extended`)")),
        }
    }
}

/// Ground `answer` facts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnswerSet(BTreeSet<Literal>);

impl AnswerSet {
    pub fn new() -> AnswerSet {
        AnswerSet::default()
    }

    /// Inserts `fact` if it is a ground `answer` fact; returns whether it was new.
    pub fn insert(&mut self, fact: Literal) -> bool {
        debug_assert!(fact.is_ground() && fact.pred == answer_sym());
        self.0.insert(fact)
    }

    pub fn contains(&self, fact: &Literal) -> bool {
        self.0.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Answers in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn difference<'a>(&'a self, other: &'a AnswerSet) -> impl Iterator<Item = &'a Literal> {
        self.0.difference(&other.0)
    }
}

impl FromIterator<Literal> for AnswerSet {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        AnswerSet(iter.into_iter().collect())
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Instance of `prog_rule` called by the selected literal of `state_rule`.
pub fn instantiate(state_rule: &Rule, prog_rule: &Rule) -> Option<Rule> {
    let call = selected(state_rule)?;
    let renamed = shift_vars(prog_rule, state_rule.max_var().map_or(0, |m| m + 1));
    let mgu = unify(call, &renamed.head)?;
    Some(normalize(&mgu.apply_rule(&renamed)))
}

/// Reduct of `r` by the ground fact `fact`: the selected literal is removed
/// and the unifier applied to the rest.
pub fn reduce(r: &Rule, fact: &Literal) -> Option<Rule> {
    let i = SELECTION.select(r)?;
    let mgu = unify(&r.body[i], fact)?;
    let body = r.body.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, l)| mgu.apply_literal(l)).collect();
    Some(normalize(&Rule::new(mgu.apply_literal(&r.head), body)))
}

/// Resolves the single body literal of `r` against `prog_rule`.
pub fn last_literal_resolve(r: &Rule, prog_rule: &Rule) -> Option<Rule> {
    if r.body.len() != 1 {
        return None;
    }
    let renamed = shift_vars(prog_rule, r.max_var().map_or(0, |m| m + 1));
    let mgu = unify(&r.body[0], &renamed.head)?;
    let resolvent = Rule::new(r.head.clone(), renamed.body);
    Some(normalize(&mgu.apply_rule(&resolvent)))
}

fn depends_directly(r: &Rule, target: &Rule) -> bool {
    selected(r).is_some_and(|l| unifiable_apart(l, &target.head))
}

/// Whether `r` depends on `target` with respect to `s`: a chain of direct
/// dependencies (selected literal unifies with the next rule's head) through
/// rules of `s` leads from `r` to a rule depending directly on `target`.
/// `target` itself need not belong to `s`.
pub fn depends_on(r: &Rule, target: &Rule, s: &State) -> bool {
    let mut seen: BTreeSet<&Rule> = BTreeSet::new();
    let mut queue = VecDeque::from([r]);
    while let Some(x) = queue.pop_front() {
        if !seen.insert(x) {
            continue;
        }
        if depends_directly(x, target) {
            return true;
        }
        queue.extend(s.iter().filter(|y| depends_directly(x, y)));
    }
    false
}

/// How a rule entered a state listing.
///
/// `rule` indices refer to the listing of the previous state; `caller`,
/// `fact` and `because` refer to the listing being built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    Goal {
        goal: usize,
    },
    Instance {
        program_rule: usize,
        caller: usize,
    },
    LastLiteral {
        program_rule: usize,
        caller: usize,
    },
    /// Reduced by the fact of the transition.
    Reduction {
        rule: usize,
    },
    /// Reduced by an IDB fact derived in the same transition.
    DerivedReduction {
        rule: usize,
        fact: usize,
    },
    Copy {
        rule: usize,
        because: usize,
    },
}

/// Rules in derivation order, each with its first derivation.
#[derive(Clone, Debug, Default)]
pub struct Listing {
    rules: Vec<(Rule, Derivation)>,
    index: HashMap<Rule, usize>,
}

impl Listing {
    fn push(&mut self, r: Rule, d: Derivation) -> bool {
        if self.index.contains_key(&r) {
            return false;
        }
        self.index.insert(r.clone(), self.rules.len());
        self.rules.push((r, d));
        true
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().map(|(r, _)| r)
    }

    pub fn entries(&self) -> &[(Rule, Derivation)] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn to_state(&self) -> State {
        State::new(self.rules().cloned())
    }
}

/// Closes `listing` under instantiation (and, in extended mode, last literal
/// resolution) starting at position `from`.
fn close_under_calls(listing: &mut Listing, from: usize, p: &Program, mode: EngineMode) {
    let mut k = from;
    while k < listing.rules.len() {
        let r = listing.rules[k].0.clone();
        if let Some(call) = selected(&r).filter(|l| p.is_idb(l.pred)) {
            let resolve_last = mode == EngineMode::Extended && r.body.len() == 1;
            for (j, pr) in p.rules().iter().enumerate().filter(|(_, pr)| pr.head.pred == call.pred) {
                if resolve_last {
                    if let Some(x) = last_literal_resolve(&r, pr) {
                        listing.push(x, Derivation::LastLiteral { program_rule: j, caller: k });
                    }
                } else if let Some(x) = instantiate(&r, pr) {
                    listing.push(x, Derivation::Instance { program_rule: j, caller: k });
                }
            }
        }
        k += 1;
    }
}

fn initial_listing(p: &Program, mode: EngineMode) -> Listing {
    let mut listing = Listing::default();
    for (i, g) in p.goals().iter().enumerate() {
        listing.push(normalize(g), Derivation::Goal { goal: i });
    }
    close_under_calls(&mut listing, 0, p, mode);
    listing
}

/// The goal rules closed under instantiation (basic mode) or under
/// instantiation and last literal resolution (extended mode).
pub fn initial_state(p: &Program, mode: EngineMode) -> State {
    initial_listing(p, mode).to_state()
}

/// Reverse direct-dependency graph of a state: `callers[j]` lists the rules
/// whose selected literal unifies with the head of rule `j`.
struct Dependencies {
    callers: Vec<Vec<usize>>,
    by_pred: HashMap<crate::symbol::Sym, Vec<usize>>,
}

impl Dependencies {
    fn new(rules: &[&Rule]) -> Dependencies {
        let mut by_pred: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if let Some(l) = selected(r) {
                by_pred.entry(l.pred).or_default().push(i);
            }
        }
        let callers = rules
            .iter()
            .map(|r| {
                by_pred
                    .get(&r.head.pred)
                    .map(|is| is.iter().copied().filter(|&i| depends_directly(rules[i], r)).collect())
                    .unwrap_or_default()
            })
            .collect();
        Dependencies { callers, by_pred }
    }
}

/// Successor listing of `prev` for the fact `fact`, or `None` if no rule of
/// `prev` is reduced by it.
fn successor_listing(
    prev: &[&Rule],
    deps: &Dependencies,
    fact: &Literal,
    p: &Program,
    mode: EngineMode,
) -> Option<Listing> {
    let extended = mode == EngineMode::Extended;
    let mut next = Listing::default();

    for (i, r) in prev.iter().enumerate() {
        if let Some(x) = reduce(r, fact) {
            next.push(x, Derivation::Reduction { rule: i });
        }
    }
    if next.is_empty() {
        return None;
    }

    let mut k = 0;
    while k < next.rules.len() {
        let derived = next.rules[k].0.clone();
        if derived.body.is_empty() && p.is_idb(derived.head.pred) {
            for &i in deps.by_pred.get(&derived.head.pred).into_iter().flatten() {
                let r = prev[i];
                if extended && r.body.len() <= 1 {
                    continue;
                }
                if let Some(x) = reduce(r, &derived.head) {
                    next.push(x, Derivation::DerivedReduction { rule: i, fact: k });
                }
            }
        }
        k += 1;
    }

    close_under_calls(&mut next, 0, p, mode);

    // Rules of `prev` that (transitively) wait on a pending rule of `next`.
    let mut because: Vec<Option<usize>> = vec![None; prev.len()];
    let mut queue = VecDeque::new();
    for (t, (target, _)) in next.rules.iter().enumerate() {
        if target.body.is_empty() {
            continue;
        }
        for &i in deps.by_pred.get(&target.head.pred).into_iter().flatten() {
            if because[i].is_none() && depends_directly(prev[i], target) {
                because[i] = Some(t);
                queue.push_back(i);
            }
        }
    }
    while let Some(j) = queue.pop_front() {
        for &i in &deps.callers[j] {
            if because[i].is_none() {
                because[i] = because[j];
                queue.push_back(i);
            }
        }
    }
    for (i, t) in because.iter().enumerate() {
        if let Some(t) = *t {
            if extended && prev[i].body.len() <= 1 {
                continue;
            }
            next.push(prev[i].clone(), Derivation::Copy { rule: i, because: t });
        }
    }
    Some(next)
}

/// The successor of `s` for the fact `fact`, or `None` if `fact` reduces no
/// rule of `s`.
pub fn successor_state(s: &State, fact: &Literal, p: &Program, mode: EngineMode) -> Option<State> {
    let prev: Vec<&Rule> = s.iter().collect();
    let deps = Dependencies::new(&prev);
    successor_listing(&prev, &deps, fact, p, mode).map(|l| l.to_state())
}

/// Distinct selected EDB literals of the given rules, variables renumbered.
pub fn selected_edb_literals<'a>(rules: impl IntoIterator<Item = &'a Rule>, p: &Program) -> Vec<Literal> {
    let labels: BTreeSet<Literal> = rules
        .into_iter()
        .filter_map(selected)
        .filter(|l| p.is_edb(l.pred))
        .map(|l| normalize(&Rule::fact(l.clone())).head)
        .collect();
    labels.into_iter().collect()
}

/// A state reached during the search, with the transition that first reached it.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub state: State,
    pub listing: Listing,
    /// Source state and database fact index of the discovering transition.
    pub via: Option<(usize, usize)>,
}

/// The explored state graph in discovery (breadth-first) order.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// `(source, fact index, target)` for every successful transition.
    pub transitions: Vec<(usize, usize, usize)>,
    pub answers: AnswerSet,
}

impl Trace {
    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.steps.iter().map(|s| &s.state)
    }

    pub fn state_count(&self) -> usize {
        self.steps.len()
    }
}

fn harvest(state: &State, answers: &mut AnswerSet) {
    let answer = answer_sym();
    for r in state.iter() {
        if r.head.pred == answer && r.is_fact() {
            answers.insert(r.head.clone());
        }
    }
}

/// Breadth-first search of all states reachable from the initial state.
/// Facts are tried in file order; states are identified by their rule sets.
pub fn trace(p: &Program, d: &Database, mode: EngineMode) -> Trace {
    let mut out = Trace::default();
    let mut known: HashMap<State, usize> = HashMap::new();
    let initial = initial_listing(p, mode);
    let state = initial.to_state();
    harvest(&state, &mut out.answers);
    known.insert(state.clone(), 0);
    out.steps.push(TraceStep { state, listing: initial, via: None });

    let mut current = 0;
    while current < out.steps.len() {
        let prev: Vec<&Rule> = out.steps[current].listing.rules().collect();
        let deps = Dependencies::new(&prev);
        let facts: BTreeSet<usize> =
            selected_edb_literals(prev.iter().copied(), p).iter().flat_map(|l| d.lookup(l)).collect();
        let mut discovered = Vec::new();
        for f in facts {
            let Some(listing) = successor_listing(&prev, &deps, d.fact(f), p, mode) else {
                continue;
            };
            discovered.push((f, listing));
        }
        for (f, listing) in discovered {
            let state = listing.to_state();
            let target = match known.get(&state) {
                Some(&id) => id,
                None => {
                    let id = out.steps.len();
                    harvest(&state, &mut out.answers);
                    known.insert(state.clone(), id);
                    out.steps.push(TraceStep { state, listing, via: Some((current, f)) });
                    id
                }
            };
            out.transitions.push((current, f, target));
        }
        current += 1;
    }
    out
}

/// All `answer` facts computed by some state sequence from the initial state.
pub fn evaluate(p: &Program, d: &Database, mode: EngineMode) -> AnswerSet {
    trace(p, d, mode).answers
}

impl Derivation {
    fn describe(
        &self,
        prev_base: usize,
        base: usize,
        fact_no: Option<usize>,
        goal_base: usize,
        rule_base: usize,
    ) -> String {
        let fact = fact_no.map_or_else(|| "fact".to_string(), |n| format!("[{n}]"));
        match *self {
            Derivation::Goal { goal } => format!("goal [{}]", goal_base + goal),
            Derivation::Instance { program_rule, caller } => {
                format!("instance of [{}] because of [{}]", rule_base + program_rule, base + caller)
            }
            Derivation::LastLiteral { program_rule, caller } => {
                format!("last literal resolution of [{}] with [{}]", base + caller, rule_base + program_rule)
            }
            Derivation::Reduction { rule } => format!("reduction of [{}] with {fact}", prev_base + rule),
            Derivation::DerivedReduction { rule, fact } => {
                format!("reduction of [{}] with [{}]", prev_base + rule, base + fact)
            }
            Derivation::Copy { rule, because } => {
                format!("copy of [{}] because of [{}]", prev_base + rule, base + because)
            }
        }
    }
}

/// Renders a trace as numbered listings: program rules, database facts and
/// goal rules first, then every state with the derivation of each rule.
pub fn render_trace(t: &Trace, p: &Program, d: &Database) -> String {
    let mut out = String::new();
    let mut n = 1;
    let rule_base = n;
    let _ = writeln!(out, "% program");
    for r in p.rules() {
        let _ = writeln!(out, "[{n}] {r}");
        n += 1;
    }
    let fact_base = n - 1; // database fact indices start at 1
    if !d.is_empty() {
        let _ = writeln!(out, "% database");
        for f in d.iter() {
            let _ = writeln!(out, "[{n}] {f}.");
            n += 1;
        }
    }
    let goal_base = n;
    let _ = writeln!(out, "% goal");
    for g in p.goals() {
        let _ = writeln!(out, "[{n}] {g}");
        n += 1;
    }
    let mut bases = Vec::with_capacity(t.steps.len());
    for (id, step) in t.steps.iter().enumerate() {
        let _ = writeln!(out);
        let (prev_base, fact_no) = match step.via {
            None => {
                let _ = writeln!(out, "S{id} (initial state, {} rules):", step.listing.len());
                (0, None)
            }
            Some((src, f)) => {
                let _ = writeln!(
                    out,
                    "S{id} = successor of S{src} with [{}] {}. ({} rules):",
                    fact_base + f,
                    d.fact(f),
                    step.listing.len()
                );
                (bases[src], Some(fact_base + f))
            }
        };
        bases.push(n);
        let lines: Vec<String> = step.listing.rules().enumerate().map(|(i, r)| format!("[{}] {r}", n + i)).collect();
        let width = lines.iter().map(String::len).max().unwrap_or(0);
        for (line, (_, how)) in lines.iter().zip(step.listing.entries()) {
            let why = how.describe(prev_base, bases[id], fact_no, goal_base, rule_base);
            let _ = writeln!(out, "{line:<width$}  % {why}");
            n += 1;
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "% transitions");
    for &(src, f, tgt) in &t.transitions {
        let _ = writeln!(out, "S{src} --{}--> S{tgt}", d.fact(f));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "% answers");
    out.push_str(&t.answers.to_string());
    out
}
