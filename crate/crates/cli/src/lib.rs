//! The `ccskp` command line: argument definitions and the commands behind
//! them. Commands write to any `Write` so they can be driven from tests.

pub mod session;

use std::io::{BufRead, Write};

use ccskp::causality::{check, render};
use ccskp::lts::{backward_steps, derive, forward_steps, LtsError, TransitionRecord};
use ccskp::prooflabels::{is_valid, parse_label};
use ccskp::reach::{
    build_graph_with, connected_with, is_reachable_with, origin_with, rewind, state_of,
};
use ccskp::syntax::{ast_string, parse, SyntaxError};
use ccskp::theorems::{
    realise, realize_connected, run_suite, summary_table, Report, Suite, TheoremError,
};
use ccskp::{
    Direction, FreshKeyPolicy, Key, Name, Process, ProofLabel, ReachError, Relation, Scale,
    Transition,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use session::Session;

#[derive(Parser, Debug)]
#[command(
    name = "ccskp",
    version,
    about = "Reversible CCS with proof labels: stepping, graphs and causality checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the syntax tree of a process.
    Parse { process: String },
    /// Pretty-print a process.
    Print {
        process: String,
        /// Rename bound names and keys to their canonical form.
        #[arg(long)]
        canonical: bool,
    },
    /// List the enabled transitions of a process.
    Steps {
        process: String,
        #[arg(long, value_enum)]
        dir: Option<Dir>,
        /// Show the derivation of every step.
        #[arg(long)]
        tree: bool,
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Decide a causality relation between two proof labels.
    Check {
        #[arg(value_parser = parse_relation)]
        relation: Relation,
        label1: String,
        label2: String,
    },
    /// Export the transition graph of a process.
    Graph {
        process: String,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(long, default_value_t = ccskp::reach::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Rewind a process to the standard process it comes from.
    Origin {
        process: String,
        /// Also print the backward steps leading there.
        #[arg(long)]
        path: bool,
        #[arg(long, default_value_t = ccskp::reach::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Whether a process can be reached from a standard process.
    Reachable {
        process: String,
        #[arg(long, default_value_t = ccskp::reach::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Whether two transitions have connected sources.
    Connected {
        source1: String,
        label1: String,
        source2: String,
        label2: String,
        #[arg(long, value_enum, default_value_t = Dir::Forward)]
        dir1: Dir,
        #[arg(long, value_enum, default_value_t = Dir::Forward)]
        dir2: Dir,
        #[arg(long, default_value_t = ccskp::reach::DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
    /// Build a standard process performing a label; with two connected
    /// labels, build two connected transitions carrying them.
    Realise {
        label: String,
        second: Option<String>,
    },
    /// Run a property suite over bounded corpora.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Step through a process interactively.
    Repl { process: String },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dir {
    Forward,
    Backward,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Forward => Direction::Forward,
            Dir::Backward => Direction::Backward,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ListFormat {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

/// Corpus bounds for `verify`; defaults are the acceptance scale.
#[derive(Args, Debug, Clone)]
pub struct ScaleArgs {
    /// Names used to build processes.
    #[arg(long, value_delimiter = ',', default_value = "a,b", value_parser = parse_name)]
    pub names: Vec<Name>,
    /// Names used to build proof labels.
    #[arg(long, value_delimiter = ',', default_value = "a", value_parser = parse_name)]
    pub label_names: Vec<Name>,
    #[arg(long, value_delimiter = ',', default_value = "1,2", value_parser = parse_key)]
    pub keys: Vec<Key>,
    /// Maximum number of decorators in a proof label.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Maximum number of operators in a process.
    #[arg(long, default_value_t = 4)]
    pub max_size: usize,
    #[arg(long, default_value_t = ccskp::reach::DEFAULT_STATE_CAP)]
    pub state_cap: usize,
}

impl From<ScaleArgs> for Scale {
    fn from(a: ScaleArgs) -> Self {
        Scale {
            names: a.names,
            label_names: a.label_names,
            keys: a.keys,
            depth: a.depth,
            max_size: a.max_size,
            state_cap: a.state_cap,
        }
    }
}

fn parse_relation(s: &str) -> Result<Relation, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
        .map_err(|e| format!("{e} (one of {})", Suite::NAMES.join(", ")))
}

fn parse_name(s: &str) -> Result<Name, String> {
    Name::new(s).map_err(|e| e.to_string())
}

fn parse_key(s: &str) -> Result<Key, String> {
    s.parse::<u32>()
        .map(Key)
        .map_err(|e| format!("bad key `{s}`: {e}"))
}

/// The outcome of a command that ran to completion.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Success, or the property holds.
    Holds,
    /// The property does not hold.
    Fails,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{0} is not a valid proof label")]
    InvalidLabel(Box<ProofLabel>),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 when a resource bound was hit.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Reach(ReachError::StateCap { .. }) => 3,
            CliError::Theorem(TheoremError::Rejected(_)) => 1,
            _ => 2,
        }
    }
}

fn process(text: &str) -> Result<Process, CliError> {
    Ok(parse(text)?)
}

fn valid_label(text: &str) -> Result<ProofLabel, CliError> {
    let t = parse_label(text)?;
    if !is_valid(&t) {
        return Err(CliError::InvalidLabel(Box::new(t)));
    }
    Ok(t)
}

fn transition(source: &str, label: &str, dir: Dir) -> Result<Transition, CliError> {
    let p = process(source)?;
    let t = valid_label(label)?;
    let dir = Direction::from(dir);
    derive(&p, dir, &t).ok_or_else(|| {
        CliError::Lts(LtsError::NotDerivable {
            process: p.to_string(),
            dir,
            label: t.to_string(),
        })
    })
}

/// Runs one command. `input` is only read by the interactive stepper.
pub fn run(
    command: Command,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    match command {
        Command::Parse { process: text } => {
            writeln!(out, "{}", ast_string(&process(&text)?))?;
        }
        Command::Print {
            process: text,
            canonical,
        } => {
            let p = process(&text)?;
            let p = if canonical { state_of(&p) } else { p };
            writeln!(out, "{p}")?;
        }
        Command::Steps {
            process: text,
            dir,
            tree,
            format,
        } => {
            let p = process(&text)?;
            let mut steps = Vec::new();
            if dir != Some(Dir::Backward) {
                steps.extend(forward_steps(&p, FreshKeyPolicy::LeastAbsent));
            }
            if dir != Some(Dir::Forward) {
                steps.extend(backward_steps(&p));
            }
            match format {
                ListFormat::Text => write_steps(out, &steps, tree)?,
                ListFormat::Json => {
                    let records: Vec<TransitionRecord> =
                        steps.iter().map(Transition::record).collect();
                    writeln!(out, "{}", serde_json::to_string_pretty(&records)?)?;
                }
            }
        }
        Command::Check {
            relation,
            label1,
            label2,
        } => {
            let (a, b) = (valid_label(&label1)?, valid_label(&label2)?);
            let sym = relation.symbol();
            return Ok(match check(relation, &a, &b) {
                Some(d) => {
                    writeln!(out, "holds: {a} {sym} {b}")?;
                    write!(out, "{}", render(&d, &a, &b))?;
                    Outcome::Holds
                }
                None => {
                    writeln!(out, "does not hold: {a} {sym} {b}")?;
                    Outcome::Fails
                }
            });
        }
        Command::Graph {
            process: text,
            format,
            state_cap,
        } => {
            let g = build_graph_with(&[process(&text)?], state_cap)?;
            match format {
                GraphFormat::Dot => write!(out, "{}", g.to_dot())?,
                GraphFormat::Json => writeln!(out, "{}", g.to_json())?,
            }
        }
        Command::Origin {
            process: text,
            path,
            state_cap,
        } => {
            let p = process(&text)?;
            match origin_with(&p, state_cap) {
                Ok(o) => {
                    writeln!(out, "{o}")?;
                    if path {
                        if let Some(back) = rewind(&p) {
                            writeln!(out, "{back}")?;
                        }
                    }
                }
                Err(ReachError::NotReachable(_)) => {
                    writeln!(out, "{p} is not reachable from any standard process")?;
                    return Ok(Outcome::Fails);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Reachable {
            process: text,
            state_cap,
        } => {
            let p = process(&text)?;
            let yes = is_reachable_with(&p, state_cap)?;
            writeln!(out, "{}", if yes { "reachable" } else { "not reachable" })?;
            return Ok(Outcome::from_bool(yes));
        }
        Command::Connected {
            source1,
            label1,
            source2,
            label2,
            dir1,
            dir2,
            state_cap,
        } => {
            let t1 = transition(&source1, &label1, dir1)?;
            let t2 = transition(&source2, &label2, dir2)?;
            let conn = check(Relation::Conn, &t1.label, &t2.label).is_some();
            let verdict = if conn { "holds" } else { "does not hold" };
            return Ok(match connected_with(&t1, &t2, state_cap)? {
                Some(path) => {
                    writeln!(out, "connected by a path of {}", steps(path.len()))?;
                    if !path.is_empty() {
                        writeln!(out, "{path}")?;
                    }
                    writeln!(out, "labels: {} ⌣ {} {verdict}", t1.label, t2.label)?;
                    Outcome::Holds
                }
                None => {
                    writeln!(out, "not connected")?;
                    Outcome::Fails
                }
            });
        }
        Command::Realise {
            label,
            second: None,
        } => {
            let t = valid_label(&label)?;
            let w = realise(&t)?;
            writeln!(out, "realiser: {}", w.realiser)?;
            writeln!(out, "step: {}", w.step)?;
        }
        Command::Realise {
            label,
            second: Some(second),
        } => {
            let (a, b) = (valid_label(&label)?, valid_label(&second)?);
            let Some(d) = check(Relation::Conn, &a, &b) else {
                writeln!(out, "does not hold: {a} ⌣ {b}")?;
                return Ok(Outcome::Fails);
            };
            let w = realize_connected(&d, &a, &b)?;
            writeln!(out, "first: {}", w.t1)?;
            writeln!(out, "link: {}", steps(w.link.len()))?;
            for t in &w.link.steps {
                writeln!(out, "  {t}")?;
            }
            writeln!(out, "second: {}", w.t2)?;
        }
        Command::Verify {
            suite,
            scale,
            format,
        } => {
            let scale = Scale::from(scale);
            let reports = run_suite(suite, &scale)?;
            let ok = !reports.iter().any(Report::is_blocking_failure);
            match format {
                ListFormat::Text => {
                    writeln!(out, "{}\n", scale.describe())?;
                    write!(out, "{}", summary_table(&reports))?;
                    writeln!(
                        out,
                        "\n{}",
                        if ok {
                            "all properties hold"
                        } else {
                            "counterexamples found"
                        }
                    )?;
                }
                ListFormat::Json => {
                    let doc = VerifyOutput {
                        suite: suite.to_string(),
                        scale: &scale,
                        ok,
                        reports: &reports,
                    };
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
            }
            return Ok(Outcome::from_bool(ok));
        }
        Command::Repl { process: text } => repl(Session::new(process(&text)?), input, out)?,
    }
    Ok(Outcome::Holds)
}

fn steps(n: usize) -> String {
    if n == 1 {
        "1 step".to_string()
    } else {
        format!("{n} steps")
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    suite: String,
    scale: &'a Scale,
    ok: bool,
    reports: &'a [Report],
}

fn write_steps(out: &mut dyn Write, steps: &[Transition], tree: bool) -> std::io::Result<()> {
    let (mut f, mut b) = (0, 0);
    for t in steps {
        let counter = if t.direction == Direction::Forward {
            &mut f
        } else {
            &mut b
        };
        let tag = format!("{}{}", t.direction.letter().to_ascii_lowercase(), counter);
        *counter += 1;
        writeln!(out, "{tag}  {t}")?;
        if tree {
            for line in t.derivation.render().lines() {
                writeln!(out, "      {line}")?;
            }
        }
    }
    Ok(())
}

fn repl(mut session: Session, input: &mut dyn BufRead, out: &mut dyn Write) -> std::io::Result<()> {
    write!(out, "{}", session.show())?;
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let reply = session.execute(&line);
        write!(out, "{}", reply.text)?;
        if reply.quit {
            return Ok(());
        }
    }
}
