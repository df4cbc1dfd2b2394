//! Lexer and parser for the Datalog surface syntax.
//!
//! ```text
//! % comment to end of line
//! path(A, B) :- edge(A, B).
//! path(A, B) :- path(A, C), edge(C, B).
//! answer(A) :- path(1, A).
//! ```
//!
//! Variables start with an uppercase letter or `_` (a lone `_` is anonymous).
//! Constants are lowercase identifiers, integers or double-quoted strings.
//! Symbolic values (`$c0`) are only accepted when reading compiled automata.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::symbol::Sym;
use crate::term::{Literal, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(String),
    Str(String),
    Symbolic(u32),
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Symbolic(c) => write!(f, "`$c{c}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Implies => f.write_str("`:-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    allow_symbolic: bool,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, allow_symbolic: bool) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1, allow_symbolic }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError { line: pos.line, column: pos.column, message: message.into() }
    }

    fn take_while(&mut self, first: char, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), ParseError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let pos = Pos { line: self.line, column: self.column };
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, pos));
        };
        let ident_char = |c: char| c.is_alphanumeric() || c == '_';
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ':' => match self.bump() {
                Some('-') => Tok::Implies,
                _ => return Err(self.error(pos, "expected `:-`")),
            },
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error(pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(self.error(pos, "invalid escape in string")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                Tok::Str(s)
            }
            '$' if self.allow_symbolic => {
                if self.bump() != Some('c') {
                    return Err(self.error(pos, "expected symbolic value `$c<n>`"));
                }
                let digits = self.take_while('0', |c| c.is_ascii_digit());
                match digits[1..].parse::<u32>() {
                    Ok(n) if digits.len() > 1 => Tok::Symbolic(n),
                    _ => return Err(self.error(pos, "expected symbolic value `$c<n>`")),
                }
            }
            '-' if self.chars.peek().is_some_and(|c| c.is_ascii_digit()) => {
                Tok::Int(self.take_while('-', |c| c.is_ascii_digit()))
            }
            c if c.is_ascii_digit() => Tok::Int(self.take_while(c, |c| c.is_ascii_digit())),
            c if c.is_uppercase() || c == '_' => Tok::Var(self.take_while(c, ident_char)),
            c if c.is_alphabetic() => Tok::Ident(self.take_while(c, ident_char)),
            c => return Err(self.error(pos, format!("unexpected character `{c}`"))),
        };
        Ok((tok, pos))
    }
}

/// A parsed clause together with its source location and variable names.
#[derive(Debug, Clone)]
pub struct Clause {
    pub rule: Rule,
    /// Source names of the rule's variables, indexed by variable number.
    pub var_names: Vec<String>,
    pub pos: Pos,
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
    vars: HashMap<String, u32>,
    var_names: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allow_symbolic: bool) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(text, allow_symbolic);
        let (tok, pos) = lexer.next_token()?;
        Ok(Parser { lexer, tok, pos, vars: HashMap::new(), var_names: Vec::new() })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (tok, pos) = self.lexer.next_token()?;
        self.pos = pos;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            line: self.pos.line,
            column: self.pos.column,
            message: format!("expected {expected}, found {}", self.tok),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.advance()?;
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn var(&mut self, name: String) -> Term {
        let next = self.var_names.len() as u32;
        if name == "_" {
            self.var_names.push(name);
            return Term::Var(next);
        }
        if let Some(&id) = self.vars.get(&name) {
            return Term::Var(id);
        }
        self.vars.insert(name.clone(), next);
        self.var_names.push(name);
        Term::Var(next)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = match &self.tok {
            Tok::Var(_) => {
                let Tok::Var(name) = self.advance()? else { unreachable!() };
                return Ok(self.var(name));
            }
            Tok::Ident(s) | Tok::Int(s) | Tok::Str(s) => Term::Const(Sym::intern(s)),
            Tok::Symbolic(c) => Term::Symbolic(*c),
            _ => return Err(self.unexpected("a term")),
        };
        self.advance()?;
        Ok(t)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let Tok::Ident(name) = &self.tok else {
            return Err(self.unexpected("a predicate name"));
        };
        let pred = Sym::intern(name);
        self.advance()?;
        let mut args = Vec::new();
        if self.tok == Tok::LParen {
            self.advance()?;
            loop {
                args.push(self.term()?);
                match self.tok {
                    Tok::Comma => {
                        self.advance()?;
                    }
                    Tok::RParen => {
                        self.advance()?;
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `)`")),
                }
            }
        }
        Ok(Literal { pred, args })
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        self.vars.clear();
        self.var_names.clear();
        let pos = self.pos;
        let head = self.literal()?;
        let mut body = Vec::new();
        if self.tok == Tok::Implies {
            self.advance()?;
            loop {
                body.push(self.literal()?);
                if self.tok == Tok::Comma {
                    self.advance()?;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        let rule = Rule::new(head, body);
        Ok(Clause { rule, var_names: std::mem::take(&mut self.var_names), pos })
    }

    fn clauses(&mut self) -> Result<Vec<Clause>, ParseError> {
        let mut out = Vec::new();
        while self.tok != Tok::Eof {
            out.push(self.clause()?);
        }
        Ok(out)
    }
}

/// Parses a sequence of clauses. Variables are numbered per clause in order of
/// first occurrence, head first.
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, ParseError> {
    Parser::new(text, false)?.clauses()
}

/// Like [`parse_clauses`], additionally accepting symbolic values `$c<n>`.
pub fn parse_symbolic_clauses(text: &str) -> Result<Vec<Clause>, ParseError> {
    Parser::new(text, true)?.clauses()
}

/// Parses exactly one clause.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    single_clause(parse_symbolic_clauses(text)?)
}

/// Parses one literal with no trailing `.`; symbolic values are accepted.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text, true)?;
    let lit = p.literal()?;
    if p.tok != Tok::Eof {
        return Err(p.unexpected("end of literal"));
    }
    Ok(lit)
}

fn single_clause(mut clauses: Vec<Clause>) -> Result<Rule, ParseError> {
    if clauses.len() != 1 {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("expected exactly one clause, found {}", clauses.len()),
        });
    }
    Ok(clauses.remove(0).rule)
}
