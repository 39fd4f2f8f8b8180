use std::fmt::Write as _;

use ccskp::lts::{backward_steps, derive, forward_steps, reverse, LtsError};
use ccskp::{Direction, FreshKeyPolicy, Process, Transition};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("no {dir} step {index}; {available} available")]
    NoSuchStep {
        dir: Direction,
        index: usize,
        available: usize,
    },
    #[error("nothing to undo")]
    NothingToUndo,
    #[error(transparent)]
    Lts(#[from] LtsError),
}

/// An interactive walk through the transitions of a process.
///
/// Every applied step is kept, so replaying the history from the initial
/// process always leads back to the current one.
#[derive(Clone, Debug)]
pub struct Session {
    initial: Process,
    current: Process,
    history: Vec<Transition>,
}

/// What the stepper prints back for one input line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub quit: bool,
}

impl Reply {
    fn say(text: impl Into<String>) -> Self {
        Reply {
            text: text.into(),
            quit: false,
        }
    }
}

const HELP: &str =
    "commands: f N (forward step N), b N (backward step N), undo, show, help, quit\n";

impl Session {
    pub fn new(p: Process) -> Self {
        Session {
            initial: p.clone(),
            current: p,
            history: Vec::new(),
        }
    }

    pub fn current(&self) -> &Process {
        &self.current
    }

    pub fn initial(&self) -> &Process {
        &self.initial
    }

    pub fn history(&self) -> &[Transition] {
        &self.history
    }

    pub fn steps(&self, dir: Direction) -> Vec<Transition> {
        match dir {
            Direction::Forward => forward_steps(&self.current, FreshKeyPolicy::LeastAbsent),
            Direction::Backward => backward_steps(&self.current),
        }
    }

    pub fn apply(&mut self, dir: Direction, index: usize) -> Result<&Transition, SessionError> {
        let mut steps = self.steps(dir);
        if index >= steps.len() {
            return Err(SessionError::NoSuchStep {
                dir,
                index,
                available: steps.len(),
            });
        }
        let t = steps.swap_remove(index);
        self.current = t.target.clone();
        self.history.push(t);
        Ok(self.history.last().expect("just pushed"))
    }

    /// Takes back the last applied step by running its reverse.
    pub fn undo(&mut self) -> Result<Transition, SessionError> {
        let last = self.history.last().ok_or(SessionError::NothingToUndo)?;
        let back = reverse(last)?;
        self.history.pop();
        self.current = back.target.clone();
        Ok(back)
    }

    /// Whether re-deriving the history from the initial process ends at the
    /// current one.
    pub fn replays(&self) -> bool {
        let mut at = self.initial.clone();
        for t in &self.history {
            match derive(&at, t.direction, &t.label) {
                Some(u) if u.target == t.target => at = u.target,
                _ => return false,
            }
        }
        at == self.current
    }

    pub fn show(&self) -> String {
        let mut out = format!("current: {}\n", self.current);
        for dir in [Direction::Forward, Direction::Backward] {
            let steps = self.steps(dir);
            if steps.is_empty() {
                let _ = writeln!(out, "{dir}: none");
                continue;
            }
            let _ = writeln!(out, "{dir}:");
            let letter = dir.letter().to_ascii_lowercase();
            for (i, t) in steps.iter().enumerate() {
                let _ = writeln!(out, "  {letter}{i}  {}  ->  {}", t.label, t.target);
            }
        }
        out
    }

    /// Interprets one line of input.
    pub fn execute(&mut self, line: &str) -> Reply {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => Reply::say(""),
            ["quit" | "q" | "exit"] => Reply {
                text: String::new(),
                quit: true,
            },
            ["show" | "s"] => Reply::say(self.show()),
            ["help" | "h" | "?"] => Reply::say(HELP),
            ["undo" | "u"] => match self.undo() {
                Ok(t) => Reply::say(format!("undone: {t}\n{}", self.show())),
                Err(e) => Reply::say(format!("{e}\n")),
            },
            [cmd @ ("f" | "b"), n] => {
                let dir = if *cmd == "f" {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                let Ok(index) = n.parse::<usize>() else {
                    return Reply::say(format!("not a step number: {n}\n"));
                };
                match self.apply(dir, index) {
                    Ok(t) => {
                        let line = t.to_string();
                        Reply::say(format!("{line}\n{}", self.show()))
                    }
                    Err(e) => Reply::say(format!("{e}\n")),
                }
            }
            _ => Reply::say(format!("unknown command: {}\n{HELP}", line.trim())),
        }
    }
}
