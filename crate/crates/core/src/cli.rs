//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::deduction::{evaluate, render_trace, trace, AnswerSet, EngineMode};
use crate::format::{export_dot, read_automaton, write_automaton, FormatError};
use crate::oracle::oracle_answers;
use crate::parteval::{compile_with, Automaton, CompileError, CompileOptions, DEFAULT_STATE_CAP};
use crate::program::{Database, LoadError, Program, ValidationError};
use crate::runtime::{run_stream, run_with, RunOptions, RuntimeError};

#[derive(Parser, Debug)]
#[command(name = "earleylog", version, about = "Datalog queries by Earley Deduction and compiled automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a program against a database and print the answers.
    Eval {
        program: PathBuf,
        database: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Cross-check against a naive bottom-up evaluation.
        #[arg(long)]
        oracle: bool,
    },
    /// Compile a program into an automaton.
    Compile {
        program: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Automaton)]
        format: OutputFormat,
    },
    /// Run an automaton file (or a program, compiled first) against a database.
    Run {
        automaton: PathBuf,
        database: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Print answers as they are found instead of sorted.
        #[arg(long)]
        stream: bool,
        /// Fail when a predicate used by the automaton has no facts.
        #[arg(long)]
        strict: bool,
    },
    /// Print the numbered state sequence of an evaluation.
    Trace {
        program: PathBuf,
        database: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Extended)]
    pub mode: ModeArg,
    /// Maximum number of automaton states.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP, value_parser = parse_cap)]
    pub cap: usize,
}

fn parse_cap(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("the state cap must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Basic,
    Extended,
}

impl From<ModeArg> for EngineMode {
    fn from(m: ModeArg) -> EngineMode {
        match m {
            ModeArg::Basic => EngineMode::Basic,
            ModeArg::Extended => EngineMode::Extended,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Human-readable listing of states and transitions.
    Text,
    Dot,
    /// Machine-readable automaton file, accepted by `run`.
    Automaton,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: LoadError },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Validation(#[from] ValidationError),
    #[error("{0}")]
    Runtime(#[from] RuntimeError),
    #[error("compilation failed: {0}")]
    Compile(#[from] CompileError),
    #[error("answers differ from the oracle")]
    OracleMismatch,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => 1,
            CliError::Load { source: LoadError::Parse(_), .. } => 1,
            CliError::Load { source: LoadError::Invalid(_), .. } | CliError::Validation(_) | CliError::Runtime(_) => 2,
            CliError::Compile(_) => 3,
            CliError::OracleMismatch => 4,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    Program::parse(&read(path)?).map_err(|source| CliError::Load { path: path.into(), source })
}

fn load_database(path: &Path, p: Option<&Program>) -> Result<Database, CliError> {
    let d = Database::parse(&read(path)?).map_err(|source| CliError::Load { path: path.into(), source })?;
    if let Some(p) = p {
        p.check_database(&d)?;
    }
    Ok(d)
}

fn compile_program(p: &Program, engine: EngineArgs) -> Result<Automaton, CliError> {
    Ok(compile_with(p, CompileOptions { mode: engine.mode.into(), cap: engine.cap })?)
}

fn print_answers(out: &mut impl Write, answers: &AnswerSet) -> io::Result<()> {
    for a in answers.iter() {
        writeln!(out, "{a}")?;
    }
    Ok(())
}

fn oracle_check(answers: &AnswerSet, p: &Program, d: &Database) -> Result<(), CliError> {
    let expected = oracle_answers(p, d);
    if *answers == expected {
        return Ok(());
    }
    for missing in expected.difference(answers) {
        eprintln!("- {missing}");
    }
    for extra in answers.difference(&expected) {
        eprintln!("+ {extra}");
    }
    Err(CliError::OracleMismatch)
}

fn describe(a: &Automaton) -> String {
    let mut out = format!("% {} states, {} transitions ({} mode)\n", a.states.len(), a.transitions.len(), a.mode);
    for (i, s) in a.states.iter().enumerate() {
        let marker = if a.is_final(i) { " (final)" } else { "" };
        out.push_str(&format!("S{i}{marker}:\n"));
        for r in s.iter() {
            out.push_str(&format!("  {r}\n"));
        }
    }
    for t in &a.transitions {
        out.push_str(&format!("delta(S{}, {}) = S{}", t.source, t.label, t.target));
        if !t.registers.is_empty() {
            out.push_str(&format!("  [{}]", t.registers));
        }
        out.push('\n');
    }
    out
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: "<stdout>".into(), source };
    match cli.command {
        Command::Eval { program, database, engine, oracle } => {
            let p = load_program(&program)?;
            let d = load_database(&database, Some(&p))?;
            let answers = evaluate(&p, &d, engine.mode.into());
            print_answers(out, &answers).map_err(io_err)?;
            if oracle {
                oracle_check(&answers, &p, &d)?;
            }
        }
        Command::Compile { program, engine, format } => {
            let p = load_program(&program)?;
            let a = compile_program(&p, engine)?;
            let text = match format {
                OutputFormat::Text => describe(&a),
                OutputFormat::Dot => export_dot(&a),
                OutputFormat::Automaton => write_automaton(&a),
            };
            out.write_all(text.as_bytes()).map_err(io_err)?;
        }
        Command::Run { automaton, database, engine, stream, strict } => {
            let text = read(&automaton)?;
            let (a, p) = if text.trim_start().starts_with("earleylog-automaton") {
                let a = read_automaton(&text).map_err(|source| CliError::Format { path: automaton.clone(), source })?;
                (a, None)
            } else {
                let p = load_program(&automaton)?;
                (compile_program(&p, engine)?, Some(p))
            };
            let d = load_database(&database, p.as_ref())?;
            let opts = RunOptions { strict };
            if stream {
                for answer in run_stream(&a, &d, opts)? {
                    writeln!(out, "{answer}").map_err(io_err)?;
                }
            } else {
                let r = run_with(&a, &d, opts)?;
                log::info!(
                    "{} frames expanded, {} facts fetched, {} frames visited",
                    r.stats.frames_expanded,
                    r.stats.facts_fetched,
                    r.stats.visited
                );
                print_answers(out, &r.answers).map_err(io_err)?;
            }
        }
        Command::Trace { program, database, engine } => {
            let p = load_program(&program)?;
            let d = load_database(&database, Some(&p))?;
            let t = trace(&p, &d, engine.mode.into());
            out.write_all(render_trace(&t, &p, &d).as_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
