//! Bounded corpora of processes and proof labels.

use std::collections::HashSet;

use serde::Serialize;

use crate::prooflabels::{enumerate_valid, ProofLabel};
use crate::reach::DEFAULT_STATE_CAP;
use crate::syntax::{canonicalize, parse, Key, Label, Name, Process};

/// Bounds for exhaustive checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scale {
    /// Names used to build processes.
    pub names: Vec<Name>,
    /// Names used to build proof labels.
    pub label_names: Vec<Name>,
    pub keys: Vec<Key>,
    /// Maximum total number of decorators in a proof label.
    pub depth: usize,
    /// Maximum number of operators in a process.
    pub max_size: usize,
    pub state_cap: usize,
}

impl Default for Scale {
    fn default() -> Self {
        Scale {
            names: vec![name("a"), name("b")],
            label_names: vec![name("a")],
            keys: vec![Key(1), Key(2)],
            depth: 3,
            max_size: 4,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

fn name(s: &str) -> Name {
    Name::new(s).expect("valid name")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl Scale {
    /// One line per corpus, stating exactly what is enumerated.
    pub fn describe(&self) -> String {
        format!(
            "processes: standard, <= {} operators, names {{{}}}, plus {} fixed examples (state cap {})\n\
             labels: valid, names {{{}}}, keys {{{}}}, <= {} decorators",
            self.max_size,
            join(&self.names),
            example_processes().len(),
            self.state_cap,
            join(&self.label_names),
            join(&self.keys),
            self.depth,
        )
    }

    pub fn process_corpus(&self) -> Vec<Process> {
        let mut out = standard_processes(&self.names, self.max_size);
        let mut seen: HashSet<Process> = out.iter().map(canonicalize).collect();
        for p in example_processes() {
            if seen.insert(canonicalize(&p)) {
                out.push(p);
            }
        }
        out
    }

    pub fn label_corpus(&self) -> Vec<ProofLabel> {
        enumerate_valid(&self.label_names, &self.keys, self.depth)
    }
}

/// Every standard process with at most `max_size` operators over `names`,
/// one per alpha-equivalence class, smaller processes first.
///
/// Prefixes range over `a`, `~a` for each name and `tau`; restrictions over
/// the names themselves.
pub fn standard_processes(names: &[Name], max_size: usize) -> Vec<Process> {
    let mut actions: Vec<Label> = Vec::new();
    for n in names {
        actions.push(Label::Input(n.clone()));
        actions.push(Label::Output(n.clone()));
    }
    actions.push(Label::Tau);

    let mut seen = HashSet::new();
    let mut levels: Vec<Vec<Process>> = Vec::new();
    for size in 0..=max_size {
        let mut level = Vec::new();
        let mut keep = |p: Process, level: &mut Vec<Process>| {
            if seen.insert(canonicalize(&p)) {
                level.push(p);
            }
        };
        if size == 0 {
            keep(Process::Nil, &mut level);
        } else {
            for body in &levels[size - 1] {
                for a in &actions {
                    keep(Process::prefix(a.clone(), body.clone()), &mut level);
                }
                for n in names {
                    keep(Process::restrict(n.clone(), body.clone()), &mut level);
                }
            }
            for left_size in 0..size {
                let right_size = size - 1 - left_size;
                for x in &levels[left_size] {
                    for y in &levels[right_size] {
                        keep(Process::sum(x.clone(), y.clone()), &mut level);
                        keep(Process::par(x.clone(), y.clone()), &mut level);
                    }
                }
            }
        }
        levels.push(level);
    }
    levels.into_iter().flatten().collect()
}

/// Two well-formed examples and two processes whose keys are inconsistent.
pub fn example_processes() -> Vec<Process> {
    ["m | l", "a.b | ~b", "a[1].b[1]", "a[1].b[2] | ~b[2].~a[1]"]
        .iter()
        .map(|s| parse(s).expect("example parses"))
        .collect()
}
