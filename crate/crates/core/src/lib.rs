//! Function-free Datalog evaluated by Earley Deduction.
//!
//! A query is answered by a sequence of states, each a set of normalized rules
//! derived by instantiation and reduction from one database fact at a time
//! ([`deduction`]). Replacing data values by symbolic values turns the same
//! construction into a compiler from programs to finite automata
//! ([`parteval`]), which [`runtime`] executes against a concrete database.
//! [`oracle`] is a naive bottom-up fixpoint used to check both.

// Error values carry the offending rules for diagnostics; they are built once
// per failure, so their size does not matter.
#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod cli;
pub mod corpusgen;
pub mod deduction;
pub mod format;
pub mod normalize;
pub mod oracle;
pub mod parser;
pub mod parteval;
pub mod program;
pub mod runtime;
pub mod subst;
pub mod symbol;
pub mod term;

pub use deduction::{evaluate, AnswerSet, EngineMode};
pub use normalize::{normalize, State};
pub use parteval::{compile, Automaton};
pub use runtime::run;

pub use program::{Database, Program};

pub use symbol::Sym;
pub use term::{Literal, Rule, Term};
