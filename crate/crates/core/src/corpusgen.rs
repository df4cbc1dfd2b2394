//! Small random test instances: a program from a fixed template plus a
//! random `edge` relation over nodes `1..=n`.
//!
//! Generation is deterministic per [`InstanceSpec`], so a failing instance
//! can be reproduced from its spec or replayed from the files written by
//! [`Instance::write_files`].

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deduction::EngineMode;
use crate::program::{Database, Program};
use crate::term::{Literal, Term};

pub const MAX_NODES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    LeftRecursiveClosure,
    TailRecursiveClosure,
    /// Paths of exactly `depth` edges, `1..=3`.
    Join {
        depth: usize,
    },
    /// Paths of even length through two mutually recursive predicates.
    MutualCalls {
        tail: bool,
    },
}

impl Template {
    pub const ALL: [Template; 7] = [
        Template::LeftRecursiveClosure,
        Template::TailRecursiveClosure,
        Template::Join { depth: 1 },
        Template::Join { depth: 2 },
        Template::Join { depth: 3 },
        Template::MutualCalls { tail: false },
        Template::MutualCalls { tail: true },
    ];

    pub fn source(self) -> String {
        match self {
            Template::LeftRecursiveClosure => {
                "path(X,Y) :- edge(X,Y).\npath(X,Y) :- path(X,Z), edge(Z,Y).\nanswer(A) :- path(1,A).\n".into()
            }
            Template::TailRecursiveClosure => {
                "path(X,Y) :- edge(X,Y).\npath(X,Y) :- edge(X,Z), path(Z,Y).\nanswer(A) :- path(1,A).\n".into()
            }
            Template::Join { depth } => {
                assert!((1..=3).contains(&depth), "join depth {depth} out of range");
                let body: Vec<String> = (0..depth).map(|i| format!("edge(X{i},X{})", i + 1)).collect();
                format!("hop(X0,X{depth}) :- {}.\nanswer(A) :- hop(1,A).\n", body.join(", "))
            }
            Template::MutualCalls { tail: false } => "odd(X,Y) :- edge(X,Y).\n\
                 odd(X,Y) :- even(X,Z), edge(Z,Y).\n\
                 even(X,Y) :- odd(X,Z), edge(Z,Y).\n\
                 answer(A) :- even(1,A).\n"
                .into(),
            Template::MutualCalls { tail: true } => "odd(X,Y) :- edge(X,Y).\n\
                 odd(X,Y) :- edge(X,Z), even(Z,Y).\n\
                 even(X,Y) :- edge(X,Z), odd(Z,Y).\n\
                 answer(A) :- even(1,A).\n"
                .into(),
        }
    }

    pub fn program(self) -> Program {
        Program::parse(&self.source()).expect("templates are valid programs")
    }

    /// Whether compilation in `mode` is expected to succeed.
    pub fn compiles_in(self, mode: EngineMode) -> bool {
        match self {
            Template::TailRecursiveClosure | Template::MutualCalls { tail: true } => mode == EngineMode::Extended,
            _ => true,
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::LeftRecursiveClosure => f.write_str("tc-left"),
            Template::TailRecursiveClosure => f.write_str("tc-tail"),
            Template::Join { depth } => write!(f, "join{depth}"),
            Template::MutualCalls { tail: false } => f.write_str("mutual-left"),
            Template::MutualCalls { tail: true } => f.write_str("mutual-tail"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Chain,
    Cycle,
    /// Random edges `i -> j` with `i < j`.
    Dag,
    /// Random edges between any two nodes, self loops included.
    Random,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Chain, Shape::Cycle, Shape::Dag, Shape::Random];
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Chain => "chain",
            Shape::Cycle => "cycle",
            Shape::Dag => "dag",
            Shape::Random => "random",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceSpec {
    pub template: Template,
    pub shape: Shape,
    pub nodes: usize,
    /// Edge probability for the random shapes.
    pub density: f64,
    pub seed: u64,
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-n{}-d{}-s{}", self.template, self.shape, self.nodes, self.density, self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub program: Program,
    pub database: Database,
}

impl Instance {
    /// Writes `<stem>.dl` and `<stem>.facts` into `dir`.
    pub fn write_files(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        let stem = self.spec.to_string();
        let dl = dir.join(format!("{stem}.dl"));
        let facts = dir.join(format!("{stem}.facts"));
        std::fs::write(&dl, format!("% {stem}\n{}", self.program))?;
        std::fs::write(&facts, self.database.to_string())?;
        Ok((dl, facts))
    }
}

fn edge(a: usize, b: usize) -> Literal {
    Literal::new("edge", vec![Term::constant(&a.to_string()), Term::constant(&b.to_string())])
}

pub fn edges(shape: Shape, nodes: usize, density: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    match shape {
        Shape::Chain => out.extend((1..nodes).map(|i| (i, i + 1))),
        Shape::Cycle => {
            out.extend((1..nodes).map(|i| (i, i + 1)));
            if nodes > 0 {
                out.push((nodes, 1));
            }
        }
        Shape::Dag => {
            for i in 1..=nodes {
                for j in i + 1..=nodes {
                    if rng.gen_bool(density) {
                        out.push((i, j));
                    }
                }
            }
        }
        Shape::Random => {
            for i in 1..=nodes {
                for j in 1..=nodes {
                    if rng.gen_bool(density) {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out
}

pub fn generate(spec: InstanceSpec) -> Instance {
    assert!(spec.nodes <= MAX_NODES, "at most {MAX_NODES} nodes, got {}", spec.nodes);
    assert!((0.0..=1.0).contains(&spec.density), "density {} out of range", spec.density);
    let facts = edges(spec.shape, spec.nodes, spec.density, spec.seed).into_iter().map(|(a, b)| edge(a, b));
    let database = Database::from_facts(facts).expect("edges are ground");
    Instance { spec, program: spec.template.program(), database }
}

/// Every template on every shape for node counts `0..=MAX_NODES` and the
/// given seeds. Deterministic shapes get a single seed.
pub fn suite(seeds: impl IntoIterator<Item = u64> + Clone, density: f64) -> Vec<InstanceSpec> {
    let mut out = Vec::new();
    for template in Template::ALL {
        for shape in Shape::ALL {
            for nodes in 0..=MAX_NODES {
                let random = matches!(shape, Shape::Dag | Shape::Random);
                let seeds: Vec<u64> = if random { seeds.clone().into_iter().collect() } else { vec![0] };
                for seed in seeds {
                    out.push(InstanceSpec { template, shape, nodes, density, seed });
                }
            }
        }
    }
    out
}
