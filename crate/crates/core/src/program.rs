//! Programs, databases and their validation.
//!
//! Predicates appearing in some rule head are IDB; every other predicate is
//! EDB. Rules with head `answer` are goal rules. The nullary EDB predicate
//! `true` is built in and always holds.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::parser::{self, Clause, ParseError, Pos};
use crate::symbol::Sym;
use crate::term::{Literal, Rule, Term};

pub const ANSWER: &str = "answer";
pub const TRUE: &str = "true";

/// Bound-pattern indexing covers predicates up to this arity; wider ones are
/// scanned through the per-predicate index.
const MAX_PATTERN_INDEX_ARITY: usize = 6;

pub fn answer_sym() -> Sym {
    Sym::intern(ANSWER)
}

pub fn true_sym() -> Sym {
    Sym::intern(TRUE)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("{pos}: rule `{rule}` is not range restricted: variable {var} does not occur in the body")]
    RangeRestriction { pos: Pos, rule: String, var: String },
    #[error("{pos}: `answer` must not occur in a rule body: `{rule}`")]
    AnswerInBody { pos: Pos, rule: String },
    #[error("{pos}: program rule `{rule}` has an empty body (facts belong in the database; use `true` for an unconditional rule)")]
    EmptyBody { pos: Pos, rule: String },
    #[error("{pos}: predicate `{pred}` used with arity {found}, but arity {expected} elsewhere")]
    ArityConflict { pos: Pos, pred: String, expected: usize, found: usize },
    #[error("{pos}: built-in predicate `{pred}` cannot be defined by a rule")]
    ReservedPredicate { pos: Pos, pred: String },
    #[error("program has no goal rule (a rule with head predicate `answer`)")]
    MissingGoal,
    #[error("{pos}: database fact `{fact}` is not ground")]
    NonGroundFact { pos: Pos, fact: String },
    #[error("{pos}: database entry `{rule}` is a rule, not a fact")]
    RuleInDatabase { pos: Pos, rule: String },
    #[error("{pos}: database fact `{fact}` uses IDB predicate `{pred}`")]
    IdbFact { pos: Pos, fact: String, pred: String },
    #[error("{pos}: symbolic value in `{rule}`; symbolic values cannot appear in programs or databases")]
    SymbolicValue { pos: Pos, rule: String },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// A validated program: program rules, goal rules and the EDB/IDB partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    goals: Vec<Rule>,
    idb: BTreeSet<Sym>,
    edb: BTreeSet<Sym>,
    arities: BTreeMap<Sym, usize>,
}

fn check_arity(arities: &mut BTreeMap<Sym, usize>, l: &Literal, pos: Pos) -> Result<(), ValidationError> {
    let expected = *arities.entry(l.pred).or_insert(l.arity());
    if expected != l.arity() {
        return Err(ValidationError::ArityConflict { pos, pred: l.pred.to_string(), expected, found: l.arity() });
    }
    Ok(())
}

impl Program {
    pub fn parse(text: &str) -> Result<Program, LoadError> {
        Ok(Program::from_clauses(parser::parse_clauses(text)?)?)
    }

    /// Validates rules that did not come from source text.
    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Result<Program, ValidationError> {
        Program::from_clauses(rules.into_iter().map(|rule| Clause {
            var_names: (0..=rule.max_var().unwrap_or(0)).map(|v| format!("X{v}")).collect(),
            rule,
            pos: Pos::default(),
        }))
    }

    fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Result<Program, ValidationError> {
        let answer = answer_sym();
        let truth = true_sym();
        let mut arities = BTreeMap::new();
        arities.insert(truth, 0);
        let mut rules = Vec::new();
        let mut goals = Vec::new();
        let mut seen = HashSet::new();
        let mut idb = BTreeSet::new();
        let mut mentioned = BTreeSet::new();
        for Clause { rule, var_names, pos } in clauses {
            if rule.literals().any(|l| l.symbolics().next().is_some()) {
                return Err(ValidationError::SymbolicValue { pos, rule: rule.to_string() });
            }
            for l in rule.literals() {
                check_arity(&mut arities, l, pos)?;
                mentioned.insert(l.pred);
            }
            if rule.head.pred == truth {
                return Err(ValidationError::ReservedPredicate { pos, pred: TRUE.into() });
            }
            if rule.body.is_empty() {
                return Err(ValidationError::EmptyBody { pos, rule: rule.to_string() });
            }
            if rule.body.iter().any(|l| l.pred == answer) {
                return Err(ValidationError::AnswerInBody { pos, rule: rule.to_string() });
            }
            if !rule.is_range_restricted() {
                let body: BTreeSet<u32> = rule.body.iter().flat_map(Literal::vars).collect();
                let var = rule.head.vars().find(|v| !body.contains(v)).unwrap_or(0);
                return Err(ValidationError::RangeRestriction {
                    pos,
                    rule: rule.to_string(),
                    var: var_names.get(var as usize).cloned().unwrap_or_else(|| format!("X{var}")),
                });
            }
            idb.insert(rule.head.pred);
            if !seen.insert(rule.clone()) {
                continue;
            }
            if rule.head.pred == answer {
                goals.push(rule);
            } else {
                rules.push(rule);
            }
        }
        if goals.is_empty() {
            return Err(ValidationError::MissingGoal);
        }
        let mut edb: BTreeSet<Sym> = mentioned.difference(&idb).copied().collect();
        edb.insert(truth);
        Ok(Program { rules, goals, idb, edb, arities })
    }

    /// Program rules, excluding goal rules.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn goals(&self) -> &[Rule] {
        &self.goals
    }

    pub fn all_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().chain(&self.goals)
    }

    pub fn is_idb(&self, pred: Sym) -> bool {
        self.idb.contains(&pred)
    }

    pub fn is_edb(&self, pred: Sym) -> bool {
        !self.idb.contains(&pred)
    }

    pub fn idb(&self) -> &BTreeSet<Sym> {
        &self.idb
    }

    pub fn edb(&self) -> &BTreeSet<Sym> {
        &self.edb
    }

    pub fn arity(&self, pred: Sym) -> Option<usize> {
        self.arities.get(&pred).copied()
    }

    /// Length of the longest rule body (goal rules included).
    pub fn max_body_len(&self) -> usize {
        self.all_rules().map(|r| r.body.len()).max().unwrap_or(0)
    }

    /// Constants occurring in program or goal rules.
    pub fn constants(&self) -> BTreeSet<Sym> {
        self.all_rules()
            .flat_map(|r| r.literals().flat_map(|l| l.args.iter()).copied().collect::<Vec<_>>())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    /// Checks that a database can be paired with this program.
    pub fn check_database(&self, db: &Database) -> Result<(), ValidationError> {
        for (i, fact) in db.iter().enumerate() {
            let pos = db.positions.get(i).copied().unwrap_or_default();
            if self.is_idb(fact.pred) {
                return Err(ValidationError::IdbFact { pos, fact: fact.to_string(), pred: fact.pred.to_string() });
            }
            if let Some(expected) = self.arity(fact.pred) {
                if expected != fact.arity() {
                    return Err(ValidationError::ArityConflict {
                        pos,
                        pred: fact.pred.to_string(),
                        expected,
                        found: fact.arity(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.all_rules() {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

type PatternKey = (Sym, u64, Vec<Term>);

/// A set of ground EDB facts, indexed by predicate and by bound-argument
/// pattern. Fact indices follow file order starting at 1; index 0 is the
/// built-in `true` fact.
#[derive(Debug, Clone)]
pub struct Database {
    facts: Vec<Literal>,
    positions: Vec<Pos>,
    members: HashSet<Literal>,
    by_pred: HashMap<Sym, Vec<usize>>,
    by_pattern: HashMap<PatternKey, Vec<usize>>,
    arities: HashMap<Sym, usize>,
}

impl Default for Database {
    fn default() -> Self {
        let mut db = Database {
            facts: Vec::new(),
            positions: Vec::new(),
            members: HashSet::new(),
            by_pred: HashMap::new(),
            by_pattern: HashMap::new(),
            arities: HashMap::new(),
        };
        db.push(Literal { pred: true_sym(), args: Vec::new() });
        db
    }
}

impl Database {
    pub fn new() -> Database {
        Database::default()
    }

    pub fn parse(text: &str) -> Result<Database, LoadError> {
        let mut db = Database::new();
        for Clause { rule, pos, .. } in parser::parse_clauses(text)? {
            if !rule.body.is_empty() {
                return Err(ValidationError::RuleInDatabase { pos, rule: rule.to_string() }.into());
            }
            db.insert_at(rule.head, pos)?;
        }
        Ok(db)
    }

    pub fn from_facts(facts: impl IntoIterator<Item = Literal>) -> Result<Database, ValidationError> {
        let mut db = Database::new();
        for fact in facts {
            db.insert_at(fact, Pos::default())?;
        }
        Ok(db)
    }

    fn insert_at(&mut self, fact: Literal, pos: Pos) -> Result<(), ValidationError> {
        if !fact.is_ground() || fact.symbolics().next().is_some() {
            return Err(ValidationError::NonGroundFact { pos, fact: fact.to_string() });
        }
        let expected = *self.arities.entry(fact.pred).or_insert(fact.arity());
        if expected != fact.arity() {
            return Err(ValidationError::ArityConflict {
                pos,
                pred: fact.pred.to_string(),
                expected,
                found: fact.arity(),
            });
        }
        if !self.members.contains(&fact) {
            self.positions.push(pos);
            self.push(fact);
        }
        Ok(())
    }

    fn push(&mut self, fact: Literal) {
        let idx = self.facts.len();
        self.arities.entry(fact.pred).or_insert(fact.arity());
        self.by_pred.entry(fact.pred).or_default().push(idx);
        if fact.arity() <= MAX_PATTERN_INDEX_ARITY {
            for mask in 1..(1u64 << fact.arity()) {
                let key = (fact.pred, mask, masked(&fact.args, mask));
                self.by_pattern.entry(key).or_default().push(idx);
            }
        }
        self.members.insert(fact.clone());
        self.facts.push(fact);
    }

    /// User facts in file order (the built-in `true` is not included).
    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.facts[1..].iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fact(&self, idx: usize) -> &Literal {
        &self.facts[idx]
    }

    pub fn contains(&self, fact: &Literal) -> bool {
        self.members.contains(fact)
    }

    /// Predicates with at least one fact, plus `true`.
    pub fn predicates(&self) -> impl Iterator<Item = Sym> + '_ {
        self.by_pred.keys().copied()
    }

    pub fn has_predicate(&self, pred: Sym) -> bool {
        self.by_pred.contains_key(&pred)
    }

    /// Indices (ascending, i.e. file order) of facts unifying with `pattern`.
    pub fn lookup(&self, pattern: &Literal) -> Vec<usize> {
        let mask = pattern.args.iter().enumerate().filter(|(_, t)| !t.is_var()).fold(0u64, |m, (i, _)| m | (1 << i));
        let candidates: &[usize] = if mask != 0 && pattern.arity() <= MAX_PATTERN_INDEX_ARITY {
            let key = (pattern.pred, mask, masked(&pattern.args, mask));
            self.by_pattern.get(&key).map_or(&[], Vec::as_slice)
        } else {
            self.by_pred.get(&pattern.pred).map_or(&[], Vec::as_slice)
        };
        candidates.iter().copied().filter(|&i| matches_pattern(pattern, &self.facts[i])).collect()
    }
}

fn masked(args: &[Term], mask: u64) -> Vec<Term> {
    args.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &t)| t).collect()
}

fn matches_pattern(pattern: &Literal, fact: &Literal) -> bool {
    if pattern.pred != fact.pred || pattern.arity() != fact.arity() {
        return false;
    }
    let mut bound: HashMap<u32, Term> = HashMap::new();
    pattern.args.iter().zip(&fact.args).all(|(&p, &f)| match p {
        Term::Var(v) => *bound.entry(v).or_insert(f) == f,
        p => p == f,
    })
}

impl fmt::Display for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in self.iter() {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}
