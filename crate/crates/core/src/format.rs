//! Text serialization and DOT export of compiled automata.
//!
//! The text format is line oriented:
//!
//! ```text
//! earleylog-automaton 1
//! mode extended
//! state 0
//! rule answer(X0) :- path(1,X0).
//! state 1
//! rule answer($c0).
//! final 1 answer($c0)
//! transition 0 -> 1 map $c0=#1 on edge(1,X0)
//! ```
//!
//! `#i` in a register map is argument position `i` (0-based) of the matched
//! fact, `$cN` is register `N` of the source state, and `map -` is an empty
//! map. Blank lines and lines starting with `%` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::deduction::EngineMode;
use crate::normalize::{canonicalize, State};
use crate::parser::{parse_literal, parse_rule, ParseError};
use crate::parteval::{Automaton, Origin, RegisterMap, StateId, Transition};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "earleylog-automaton";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Term {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("unsupported automaton format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("not an automaton file")]
    MissingHeader,
}

pub fn write_automaton(a: &Automaton) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {FORMAT_VERSION}").unwrap();
    writeln!(out, "mode {}", a.mode).unwrap();
    for (i, s) in a.states.iter().enumerate() {
        writeln!(out, "state {i}").unwrap();
        for r in s.iter() {
            writeln!(out, "rule {r}").unwrap();
        }
    }
    for (s, templates) in &a.finals {
        for t in templates {
            writeln!(out, "final {s} {t}").unwrap();
        }
    }
    for t in &a.transitions {
        write!(out, "transition {} -> {} map ", t.source, t.target).unwrap();
        if t.registers.is_empty() {
            out.push('-');
        }
        for (j, o) in t.registers.origins().iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "$c{j}={o}").unwrap();
        }
        writeln!(out, " on {}", t.label).unwrap();
    }
    out
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

fn number<T: std::str::FromStr>(line: usize, text: &str) -> Result<T, FormatError> {
    text.parse().map_err(|_| syntax(line, format!("expected a number, found `{text}`")))
}

fn parse_map(line: usize, text: &str) -> Result<RegisterMap, FormatError> {
    if text == "-" {
        return Ok(RegisterMap::default());
    }
    let mut assign = Vec::new();
    for (j, item) in text.split(',').enumerate() {
        let (target, origin) = item.split_once('=').ok_or_else(|| syntax(line, format!("bad register `{item}`")))?;
        if target != format!("$c{j}") {
            return Err(syntax(line, format!("register `{target}` out of order")));
        }
        let origin = if let Some(pos) = origin.strip_prefix('#') {
            Origin::Argument(number(line, pos)?)
        } else if let Some(reg) = origin.strip_prefix("$c") {
            Origin::Register(number(line, reg)?)
        } else {
            return Err(syntax(line, format!("bad register origin `{origin}`")));
        };
        assign.push(origin);
    }
    Ok(RegisterMap::new(assign))
}

pub fn read_automaton(text: &str) -> Result<Automaton, FormatError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

    let (_, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let version = header.strip_prefix(MAGIC).map(str::trim).ok_or(FormatError::MissingHeader)?;
    let version: u32 = version.parse().map_err(|_| FormatError::MissingHeader)?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }

    let mut mode = None;
    let mut states: Vec<Vec<crate::term::Rule>> = Vec::new();
    let mut finals: BTreeMap<StateId, Vec<crate::term::Literal>> = BTreeMap::new();
    let mut transitions = Vec::new();

    for (n, line) in lines {
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        let term_err = |source| FormatError::Term { line: n, source };
        match keyword {
            "mode" => mode = Some(rest.parse::<EngineMode>().map_err(|e| syntax(n, e))?),
            "state" => {
                let id: usize = number(n, rest)?;
                if id != states.len() {
                    return Err(syntax(n, format!("state {id} out of order")));
                }
                states.push(Vec::new());
            }
            "rule" => {
                let r = parse_rule(rest).map_err(term_err)?;
                states.last_mut().ok_or_else(|| syntax(n, "rule outside a state"))?.push(r);
            }
            "final" => {
                let (id, template) =
                    rest.split_once(' ').ok_or_else(|| syntax(n, "expected `final <state> <fact>`"))?;
                let template = parse_literal(template).map_err(term_err)?;
                finals.entry(number(n, id)?).or_default().push(template);
            }
            "transition" => {
                let bad = || syntax(n, "expected `transition <src> -> <tgt> map <map> on <label>`");
                let (src, rest) = rest.split_once(" -> ").ok_or_else(bad)?;
                let (tgt, rest) = rest.split_once(" map ").ok_or_else(bad)?;
                let (map, label) = rest.split_once(" on ").ok_or_else(bad)?;
                transitions.push(Transition {
                    source: number(n, src)?,
                    label: parse_literal(label).map_err(term_err)?,
                    registers: parse_map(n, map)?,
                    target: number(n, tgt)?,
                });
            }
            other => return Err(syntax(n, format!("unknown keyword `{other}`"))),
        }
    }

    let mode = mode.ok_or_else(|| syntax(0, "missing `mode` line"))?;
    let states: Vec<State> = states.into_iter().map(State::new).collect();
    for (i, s) in states.iter().enumerate() {
        match canonicalize(s) {
            Ok(c) if c.state == *s => {}
            _ => return Err(syntax(0, format!("state {i} is not canonical"))),
        }
    }
    if states.is_empty() {
        return Err(syntax(0, "automaton has no states"));
    }
    for t in &transitions {
        if t.source >= states.len() || t.target >= states.len() {
            return Err(syntax(0, format!("transition {} -> {} refers to a missing state", t.source, t.target)));
        }
        if t.registers.len() != states[t.target].symbolic_count() {
            return Err(syntax(0, format!("transition {} -> {} does not fill every register", t.source, t.target)));
        }
    }
    if let Some(&s) = finals.keys().find(|&&s| s >= states.len()) {
        return Err(syntax(0, format!("final state {s} does not exist")));
    }
    Ok(Automaton { mode, states, transitions, finals })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz description: one node per state, one edge per transition.
pub fn export_dot(a: &Automaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n");
    for i in 0..a.states.len() {
        let shape = if a.is_final(i) { "doublecircle" } else { "circle" };
        let label = match a.finals.get(&i) {
            Some(t) => {
                let t: Vec<String> = t.iter().map(|l| l.to_string()).collect();
                format!("S{i}\\n{}", dot_escape(&t.join(" ")))
            }
            None => format!("S{i}"),
        };
        writeln!(out, "  s{i} [shape={shape}, label=\"{label}\"];").unwrap();
    }
    for t in &a.transitions {
        let mut label = dot_escape(&t.label.to_string());
        if !t.registers.is_empty() {
            write!(label, "\\n{}", t.registers).unwrap();
        }
        writeln!(out, "  s{} -> s{} [label=\"{label}\"];", t.source, t.target).unwrap();
    }
    out.push_str("}\n");
    out
}
