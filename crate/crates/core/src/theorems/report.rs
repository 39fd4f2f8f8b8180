use std::collections::BTreeMap;

use serde::Serialize;

/// At most this many counterexamples are kept per report.
const MAX_SAMPLES: usize = 10;

/// Outcome of checking one property over a corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub property: String,
    pub corpus: String,
    pub checked: u64,
    pub failures: u64,
    /// Derived expectations are reported but do not make a run fail.
    pub expectation: bool,
    pub counts: BTreeMap<String, u64>,
    pub counterexamples: Vec<String>,
}

impl Report {
    pub fn new(suite: &str, property: &str, corpus: impl Into<String>) -> Self {
        Report {
            suite: suite.to_string(),
            property: property.to_string(),
            corpus: corpus.into(),
            checked: 0,
            failures: 0,
            expectation: false,
            counts: BTreeMap::new(),
            counterexamples: Vec::new(),
        }
    }

    pub fn expectation(mut self) -> Self {
        self.expectation = true;
        self
    }

    /// Records one checked instance.
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.check_n(1, ok, describe);
    }

    /// Records `n` checked instances sharing one outcome.
    pub fn check_n(&mut self, n: u64, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += n;
        if !ok {
            self.failures += n;
            if self.counterexamples.len() < MAX_SAMPLES {
                self.counterexamples.push(describe());
            }
        }
    }

    pub fn count(&mut self, what: &str, n: u64) {
        *self.counts.entry(what.to_string()).or_insert(0) += n;
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Whether this report should fail a run.
    pub fn is_blocking_failure(&self) -> bool {
        !self.passed() && !self.expectation
    }

    /// Folds another report on the same property into this one.
    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.failures += other.failures;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        for c in other.counterexamples {
            if self.counterexamples.len() < MAX_SAMPLES {
                self.counterexamples.push(c);
            }
        }
    }
}

/// A fixed-width table, one row per report, followed by counts and any
/// counterexamples.
pub fn summary_table(reports: &[Report]) -> String {
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            let status = match (r.passed(), r.expectation) {
                (true, false) => "ok",
                (false, false) => "FAIL",
                (true, true) => "ok (expected)",
                (false, true) => "differs (expected)",
            };
            [
                r.suite.clone(),
                r.property.clone(),
                r.checked.to_string(),
                r.failures.to_string(),
                status.to_string(),
            ]
        })
        .collect();
    let header = ["suite", "property", "checked", "failures", "status"];
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            let pad = w - cell.chars().count();
            if i == 2 || i == 3 {
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            } else {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            }
            s.push_str("  ");
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&header.map(String::from));
    out.push_str(&line(&widths.map(|w| "-".repeat(w))));
    for row in &rows {
        out.push_str(&line(row));
    }
    for r in reports {
        if r.counts.is_empty() && r.counterexamples.is_empty() {
            continue;
        }
        out.push_str(&format!("\n{} / {} ({})\n", r.suite, r.property, r.corpus));
        for (k, v) in &r.counts {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        for c in &r.counterexamples {
            out.push_str(&format!("  counterexample: {c}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexamples_are_capped() {
        let mut r = Report::new("s", "p", "c");
        for i in 0..25 {
            r.check(i % 2 == 0, || format!("case {i}"));
        }
        assert_eq!(r.checked, 25);
        assert_eq!(r.failures, 12);
        assert_eq!(r.counterexamples.len(), MAX_SAMPLES);
        assert!(r.is_blocking_failure());
        assert!(!r.clone().expectation().is_blocking_failure());
    }

    #[test]
    fn table_layout() {
        let mut r = Report::new("thm2", "complementarity", "labels");
        r.check_n(9, true, String::new);
        r.count("conn", 4);
        let t = summary_table(&[r]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(
            lines[0],
            "suite  property         checked  failures  status"
        );
        assert_eq!(lines[2], "thm2   complementarity        9         0  ok");
        assert!(t.contains("  conn: 4"));
    }
}
