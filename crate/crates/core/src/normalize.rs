//! Rule normalization, rule schemata and canonical states.
//!
//! A normalized rule numbers its variables `X0, X1, ...` by first occurrence
//! (head first, arguments left to right), so rules that differ only in
//! variable names become identical. A schema additionally numbers symbolic
//! values by first occurrence. States keep their rules sorted by schema; when
//! schemata are pairwise distinct, renumbering symbolic values in that order
//! gives a canonical form shared by all states equal up to a bijective
//! renaming of symbolic values.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{write_rule, Rule, SymbolicStyle, Term};

/// Renumbers variables by first occurrence.
pub fn normalize(r: &Rule) -> Rule {
    let mut map: HashMap<u32, u32> = HashMap::new();
    r.map_terms(|t| match t {
        Term::Var(v) => {
            let next = map.len() as u32;
            Term::Var(*map.entry(v).or_insert(next))
        }
        t => t,
    })
}

pub fn is_normalized(r: &Rule) -> bool {
    normalize(r) == *r
}

fn renumber_symbolics(r: &Rule, map: &mut BTreeMap<u32, u32>) -> Rule {
    r.map_terms(|t| match t {
        Term::Symbolic(c) => {
            let next = map.len() as u32;
            Term::Symbolic(*map.entry(c).or_insert(next))
        }
        t => t,
    })
}

/// A rule with its symbolic values replaced by placeholders `$b0, $b1, ...`
/// in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schema(Rule);

impl Schema {
    /// The underlying rule, with placeholders stored as symbolic values.
    pub fn as_rule(&self) -> &Rule {
        &self.0
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, &self.0, SymbolicStyle('b'))
    }
}

pub fn schema_of(r: &Rule) -> Schema {
    Schema(renumber_symbolics(r, &mut BTreeMap::new()))
}

/// A set of normalized rules, stored sorted by (schema, rule) without
/// duplicates. Equal sets therefore have equal representations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct State {
    rules: Vec<Rule>,
}

impl State {
    /// Builds a state from rules that are already normalized.
    pub fn new(rules: impl IntoIterator<Item = Rule>) -> State {
        let mut keyed: Vec<(Schema, Rule)> = rules.into_iter().map(|r| (schema_of(&r), r)).collect();
        keyed.sort();
        keyed.dedup();
        State { rules: keyed.into_iter().map(|(_, r)| r).collect() }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn contains(&self, r: &Rule) -> bool {
        self.rules.contains(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    /// Largest symbolic value id occurring in the state.
    pub fn max_symbolic(&self) -> Option<u32> {
        self.rules.iter().flat_map(|r| r.symbolics()).max()
    }

    pub fn symbolic_count(&self) -> usize {
        let mut all: Vec<u32> = self.rules.iter().flat_map(|r| r.symbolics()).collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }

    /// Two rules sharing a schema, if any.
    pub fn schema_collision(&self) -> Option<(&Rule, &Rule)> {
        // Rules are sorted by schema, so collisions are adjacent.
        self.rules.windows(2).find(|w| schema_of(&w[0]) == schema_of(&w[1])).map(|w| (&w[0], &w[1]))
    }

    /// A state is valid iff its rules have pairwise distinct schemata.
    pub fn is_valid(&self) -> bool {
        self.schema_collision().is_none()
    }

    /// Replaces symbolic values through `map`; unmapped values are kept.
    pub fn rename_symbolics(&self, map: &BTreeMap<u32, u32>) -> State {
        State::new(self.rules.iter().map(|r| {
            r.map_terms(|t| match t {
                Term::Symbolic(c) => Term::Symbolic(map.get(&c).copied().unwrap_or(c)),
                t => t,
            })
        }))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rules `{first}` and `{second}` share the schema `{schema}`")]
pub struct SchemaCollision {
    pub first: Rule,
    pub second: Rule,
    pub schema: Schema,
}

/// A canonical state and the renumbering (old id to canonical id) that
/// produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub state: State,
    pub renaming: BTreeMap<u32, u32>,
}

/// Renumbers symbolic values `$c0, $c1, ...` by first occurrence in schema
/// order. Fails on invalid states, where schema order does not determine the
/// rule order.
pub fn canonicalize(s: &State) -> Result<Canonical, SchemaCollision> {
    if let Some((a, b)) = s.schema_collision() {
        return Err(SchemaCollision { first: a.clone(), second: b.clone(), schema: schema_of(a) });
    }
    let mut renaming = BTreeMap::new();
    let rules: Vec<Rule> = s.rules.iter().map(|r| renumber_symbolics(r, &mut renaming)).collect();
    // Schemata are unchanged by renaming, so the order is still sorted.
    debug_assert!(rules.windows(2).all(|w| schema_of(&w[0]) < schema_of(&w[1])));
    Ok(Canonical { state: State { rules }, renaming })
}

/// Whether two valid states are equal up to a bijective renaming of symbolic
/// values. Invalid states are only equivalent when identical.
pub fn states_equivalent(a: &State, b: &State) -> bool {
    match (canonicalize(a), canonicalize(b)) {
        (Ok(ca), Ok(cb)) => ca.state == cb.state,
        _ => a == b,
    }
}
