//! End-to-end acceptance run. Prints one PASS or FAIL line per criterion
//! and exits nonzero if any criterion fails.

use std::collections::HashSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ccskp::causality::{check, check_derivation, holds};
use ccskp::lts::{backward_steps, derive, forward_steps, reverse};
use ccskp::prooflabels::{enumerate_valid, is_valid, label_of};
use ccskp::reach::{
    build_graph_with, find_path, is_reachable, rewind, state_of, DEFAULT_STATE_CAP,
};
use ccskp::syntax::{canonicalize, is_std, parse};
use ccskp::theorems::{realise, realize_connected, verify_theorem1_forward};
use ccskp::{
    Direction, FreshKeyPolicy, Key, Name, Process, ProofLabel, Relation, Scale, TransitionGraph,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: false,
        detail: detail.into(),
    }
}

fn verdict(failures: u64, detail: String) -> Outcome {
    if failures == 0 {
        pass(detail)
    } else {
        fail(detail)
    }
}

/// Prints the line for one criterion. A time limit, when given, is part of
/// the criterion: exceeding it fails it.
fn report(
    n: u32,
    title: &str,
    bound: &str,
    limit: Option<Duration>,
    elapsed: Duration,
    o: Outcome,
) -> bool {
    let in_time = limit.is_none_or(|l| elapsed < l);
    let ok = o.passed && in_time;
    let late = if in_time {
        ""
    } else {
        " [time limit exceeded]"
    };
    println!(
        "{} criterion {n:>2}: {title} ({bound}) in {:.2} s{late}: {}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        o.detail
    );
    ok
}

fn ccskp(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_ccskp"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
    )
}

fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

fn criterion_1() -> Outcome {
    let mut problems = Vec::new();
    let (code, out) = ccskp(&["steps", "m | l"]);
    let want = "f0  m | l --F |L.m[0]--> m[0] | l\nf1  m | l --F |R.l[0]--> m | l[0]\n";
    if code != 0 || out != want {
        problems.push(format!("steps \"m | l\" gave {out:?}"));
    }
    let (code, out) = ccskp(&["steps", "m[0] | l"]);
    let backward: Vec<&str> = out.lines().filter(|l| l.starts_with('b')).collect();
    if code != 0 || backward != ["b0  m[0] | l --B |L.m[0]--> m | l"] {
        problems.push(format!("backward steps of \"m[0] | l\": {backward:?}"));
    }
    let (code, out) = ccskp(&["check", "indep", "|L.m[1]", "|R.l[2]"]);
    let rules: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap_or(""))
        .collect();
    if code != 0 || rules != ["P2_L"] {
        problems.push(format!("indep check: exit {code}, rules {rules:?}"));
    }
    let (code, out) = ccskp(&["check", "dep", "|L.a[1]", "|L.b[2]"]);
    let rules: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap_or(""))
        .collect();
    if code != 0 || rules != ["P1_L", "A1"] {
        problems.push(format!("dep check: exit {code}, rules {rules:?}"));
    }
    if problems.is_empty() {
        pass("2 forward steps, 1 backward step, indep via P2_L, dep via P1_L/A1")
    } else {
        fail(problems.join("; "))
    }
}

struct Corpus {
    description: String,
    graphs: Vec<(Process, TransitionGraph)>,
    build_time: Duration,
}

fn build_corpus(scale: &Scale) -> Result<Corpus, String> {
    let start = Instant::now();
    let mut graphs = Vec::new();
    for p in scale.process_corpus() {
        let g = build_graph_with(std::slice::from_ref(&p), scale.state_cap)
            .map_err(|e| e.to_string())?;
        graphs.push((p, g));
    }
    let standard = graphs.iter().filter(|(p, _)| is_std(p)).count();
    Ok(Corpus {
        description: format!("{} processes, {standard} standard", graphs.len()),
        graphs,
        build_time: start.elapsed(),
    })
}

fn criterion_2(c: &Corpus) -> Outcome {
    let (mut edges, mut failures, mut sample) = (0u64, 0u64, None);
    for (_, g) in &c.graphs {
        for e in g.all_edges() {
            edges += 1;
            let t = &e.transition;
            let ok = reverse(t).is_ok_and(|r| {
                r.label == t.label
                    && r.direction == t.direction.flip()
                    && derive(&r.source, r.direction, &r.label)
                        .is_some_and(|d| d.target == t.source)
                    && reverse(&r).as_ref() == Ok(t)
            });
            if !ok {
                failures += 1;
                sample.get_or_insert_with(|| t.to_string());
            }
        }
    }
    verdict(
        failures,
        format!(
            "{}; {edges} edges, {failures} counterexamples{}",
            c.description,
            show(sample)
        ),
    )
}

fn show(sample: Option<String>) -> String {
    sample.map(|s| format!(", e.g. {s}")).unwrap_or_default()
}

fn criterion_3(c: &Corpus) -> Outcome {
    let mut labels = HashSet::new();
    let mut failures = 0u64;
    for (_, g) in &c.graphs {
        for e in g.all_edges() {
            if !is_valid(&e.transition.label) {
                failures += 1;
            }
            labels.insert(e.transition.label.clone());
        }
    }
    verdict(
        failures,
        format!(
            "{} distinct labels on corpus transitions, {failures} invalid",
            labels.len()
        ),
    )
}

fn criterion_4(c: &Corpus) -> Outcome {
    let (mut pairs, mut failures, mut skipped) = (0u64, 0u64, 0u64);
    let mut sample = None;
    for (_, g) in &c.graphs {
        let r = verify_theorem1_forward(g);
        pairs += r.checked;
        failures += r.failures;
        skipped += r
            .counts
            .get("unreachable components skipped")
            .copied()
            .unwrap_or(0);
        if sample.is_none() {
            sample = r.counterexamples.first().cloned();
        }
    }
    verdict(
        failures,
        format!(
            "{pairs} transition pairs with connected sources, {failures} counterexamples, {skipped} unreachable components skipped{}",
            show(sample)
        ),
    )
}

/// Decisions for every ordered pair, one bit per relation.
struct Table {
    n: usize,
    bits: Vec<u8>,
}

impl Table {
    fn get(&self, rel: Relation, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j] & (1 << rel as u8) != 0
    }
}

fn decide_all(labels: &[ProofLabel]) -> Table {
    let n = labels.len();
    let mut bits = vec![0u8; n * n];
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            let mut v = 0;
            for rel in Relation::ALL {
                if holds(rel, a, b) {
                    v |= 1 << rel as u8;
                }
            }
            bits[i * n + j] = v;
        }
    }
    Table { n, bits }
}

fn criterion_5(labels: &[ProofLabel], table: &Table) -> Outcome {
    let n = labels.len();
    let (mut failures, mut conn, mut dep, mut indep) = (0u64, 0u64, 0u64, 0u64);
    let mut sample = None;
    for i in 0..n {
        for j in 0..n {
            let c = table.get(Relation::Conn, i, j);
            let d = table.get(Relation::Dep, i, j);
            let x = table.get(Relation::Indep, i, j);
            conn += c as u64;
            dep += d as u64;
            indep += x as u64;
            if (x && !c) || (d && !c) || (c != (d != x)) {
                failures += 1;
                sample.get_or_insert_with(|| format!("{} / {}", labels[i], labels[j]));
            }
        }
    }
    verdict(
        failures,
        format!(
            "{n} labels, {} ordered pairs: {conn} conn, {dep} dep, {indep} indep, {failures} counterexamples{}",
            n * n,
            show(sample)
        ),
    )
}

fn criterion_6(labels: &[ProofLabel], table: &Table) -> Outcome {
    let n = labels.len();
    let (mut witnesses, mut base, mut failures) = (0u64, 0u64, 0u64);
    let mut longest = 0;
    let mut sample = None;
    for i in 0..n {
        for j in 0..n {
            if !table.get(Relation::Conn, i, j) {
                continue;
            }
            let (a, b) = (&labels[i], &labels[j]);
            let Some(d) = check(Relation::Conn, a, b) else {
                failures += 1;
                sample.get_or_insert_with(|| format!("no derivation for {a} / {b}"));
                continue;
            };
            witnesses += 1;
            let both_visible = !label_of(a).is_tau() && !label_of(b).is_tau();
            let ok = check_derivation(&d, a, b)
                && realize_connected(&d, a, b).is_ok_and(|w| {
                    longest = longest.max(w.link.len());
                    let forward = w.t1.direction == Direction::Forward
                        && w.t2.direction == Direction::Forward;
                    let derivable = [(&w.t1, a), (&w.t2, b)].into_iter().all(|(t, l)| {
                        &t.label == l
                            && derive(&t.source, Direction::Forward, l)
                                .is_some_and(|u| u.target == t.target)
                    });
                    let linked = w.link.source == w.t1.source
                        && w.link.target == w.t2.source
                        && w.link.verify()
                        && w.link.len() <= 2;
                    let reachable = is_std(&w.t1.source) || rewind(&w.t1.source).is_some();
                    let shape = !both_visible
                        || (w.link.len() <= 1 && (is_std(&w.t1.source) || is_std(&w.t2.source)));
                    forward && derivable && linked && reachable && shape
                });
            if both_visible {
                base += 1;
            }
            if !ok {
                failures += 1;
                sample.get_or_insert_with(|| format!("{a} / {b}"));
            }
        }
    }
    verdict(
        failures,
        format!(
            "{witnesses} witnesses ({base} base case), longest link {longest}, {failures} oracle rejections{}",
            show(sample)
        ),
    )
}

fn criterion_7(labels: &[ProofLabel]) -> Outcome {
    let mut failures = 0u64;
    let mut sample = None;
    for t in labels {
        let ok = realise(t).is_ok_and(|w| {
            is_std(&w.realiser)
                && w.step.source == w.realiser
                && &w.step.label == t
                && w.step.direction == Direction::Forward
                && forward_steps(&w.realiser, FreshKeyPolicy::Exact(t.view().key()))
                    .iter()
                    .any(|s| &s.label == t && s.target == w.step.target)
                && derive(&w.realiser, Direction::Forward, t)
                    .is_some_and(|d| d.target == w.step.target)
        });
        if !ok {
            failures += 1;
            sample.get_or_insert_with(|| t.to_string());
        }
    }
    verdict(
        failures,
        format!(
            "{} labels realised, {failures} rejections{}",
            labels.len(),
            show(sample)
        ),
    )
}

fn criterion_8(c: &Corpus) -> Outcome {
    let mut problems = Vec::new();
    let roots: Vec<Process> = c
        .graphs
        .iter()
        .map(|(p, _)| p.clone())
        .filter(is_std)
        .collect();
    let mut duplicated = 0;
    for (p, g) in &c.graphs {
        if is_std(p) && g.standard_states().len() != 1 {
            duplicated += 1;
        }
    }
    if duplicated > 0 {
        problems.push(format!(
            "{duplicated} graphs with more or fewer than one standard state"
        ));
    }

    // All standard roots in one graph: one component per root, each with
    // exactly one standard state.
    let union = match build_graph_with(&roots, DEFAULT_STATE_CAP * 10) {
        Ok(g) => g,
        Err(e) => return fail(e.to_string()),
    };
    let components = union.components();
    let std_states: HashSet<usize> = union.standard_states().into_iter().collect();
    let lonely = components
        .iter()
        .all(|comp| comp.iter().filter(|s| std_states.contains(s)).count() == 1);
    if components.len() != roots.len() || !lonely {
        problems.push(format!(
            "{} components for {} roots",
            components.len(),
            roots.len()
        ));
    }

    // Path iff equal origin, on a deterministic sample of state pairs of
    // the union graph; origins come from rewinding.
    let n = union.len();
    let origin_of: Vec<Process> = (0..n)
        .map(|i| {
            rewind(union.state(i))
                .map(|p| canonicalize(&p.target))
                .unwrap_or(Process::Nil)
        })
        .collect();
    let mut pairs = 0;
    let stride = (n / 400).max(1);
    for i in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride * 7 + 1) {
            pairs += 1;
            let (x, y) = (union.state(i), union.state(j));
            let path = find_path(&union, x, y).ok().flatten();
            let ok = match &path {
                Some(p) => {
                    origin_of[i] == origin_of[j] && p.verify() && state_of(&p.target) == state_of(y)
                }
                None => origin_of[i] != origin_of[j],
            };
            if !ok {
                problems.push(format!("path/origin mismatch between {x} and {y}"));
            }
        }
    }

    let faulty: Vec<Process> = ["a[1].b[1].0", "a[1].b[2] | ~b[2].~a[1]"]
        .iter()
        .map(|s| parse(s).unwrap())
        .collect();
    for p in &faulty {
        if is_reachable(p) != Ok(false) {
            problems.push(format!("{p} reported reachable"));
        }
    }
    let stuck = &faulty[1];
    let enabled =
        forward_steps(stuck, FreshKeyPolicy::LeastAbsent).len() + backward_steps(stuck).len();
    if enabled != 0 {
        problems.push(format!("{stuck} has {enabled} enabled transitions"));
    }
    if problems.is_empty() {
        pass(format!(
            "{} standard roots, one standard state each; union graph of {n} states has {} components; \
             {pairs} sampled state pairs agree; both faulty processes unreachable, deadlock has 0 transitions",
            roots.len(),
            components.len()
        ))
    } else {
        let count = problems.len();
        problems.truncate(3);
        fail(format!("{count} problems: {}", problems.join("; ")))
    }
}

fn criterion_9(labels: &[ProofLabel], table: &Table) -> Outcome {
    let n = labels.len();
    let mut asymmetric = [0u64; 3];
    for i in 0..n {
        for j in 0..n {
            for rel in Relation::ALL {
                if table.get(rel, i, j) != table.get(rel, j, i) {
                    asymmetric[rel as usize] += 1;
                }
            }
        }
    }
    let reflexive_indep = (0..n).filter(|&i| table.get(Relation::Indep, i, i)).count();
    let reflexive_dep = (0..n).filter(|&i| table.get(Relation::Dep, i, i)).count();
    let failures = asymmetric.iter().sum::<u64>() + reflexive_indep as u64;
    let dep_note = if reflexive_dep == n {
        format!("dep reflexive on all {n} labels (expected)")
    } else {
        format!("dep reflexive on {reflexive_dep} of {n} labels (differs from expectation)")
    };
    verdict(
        failures,
        format!(
            "asymmetric pairs conn/dep/indep {}/{}/{}, {reflexive_indep} labels independent of themselves; {dep_note}",
            asymmetric[0], asymmetric[1], asymmetric[2]
        ),
    )
}

fn criterion_10() -> Outcome {
    let runs: &[&[&str]] = &[
        &["graph", "m | l"],
        &["graph", "--format", "json", "m | l"],
        &["graph", "a.b | ~b + tau"],
        &["graph", "--format", "json", "(a.b | ~b.a)\\b"],
        &["verify", "loop"],
        &["verify", "validity"],
        &["verify", "thm2"],
        &["verify", "lemmas", "--format", "json"],
        &["verify", "thm1", "--max-size", "3", "--depth", "2"],
        &["verify", "all", "--max-size", "3", "--depth", "2"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let first = ccskp(args);
        let second = ccskp(args);
        if first != second || first.0 != 0 {
            differing.push(args.join(" "));
        }
    }
    if differing.is_empty() {
        pass(format!(
            "{} commands run twice with byte-identical output",
            runs.len()
        ))
    } else {
        fail(format!(
            "outputs differ or commands failed: {}",
            differing.join("; ")
        ))
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    let secs = Duration::from_secs;

    let start = Instant::now();
    let o = criterion_1();
    ok &= report(
        1,
        "example reproduction",
        "exact match, under 1 s",
        Some(secs(1)),
        start.elapsed(),
        o,
    );

    let scale = Scale::default();
    let corpus = match build_corpus(&scale) {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL criteria 2-4, 8: corpus graphs could not be built: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "     corpus: {}; graphs built in {:.2} s",
        scale.describe().replace('\n', "; "),
        corpus.build_time.as_secs_f64()
    );

    let start = Instant::now();
    let o = criterion_2(&corpus);
    let elapsed = corpus.build_time + start.elapsed();
    ok &= report(
        2,
        "loop lemma",
        "zero counterexamples, under 60 s with graph building",
        Some(secs(60)),
        elapsed,
        o,
    );

    let start = Instant::now();
    let o = criterion_3(&corpus);
    ok &= report(
        3,
        "label validity",
        "zero counterexamples",
        None,
        start.elapsed(),
        o,
    );

    let start = Instant::now();
    let o = criterion_4(&corpus);
    let elapsed = corpus.build_time + start.elapsed();
    ok &= report(
        4,
        "connected transitions have connected labels",
        "zero counterexamples, under 60 s with graph building",
        Some(secs(60)),
        elapsed,
        o,
    );

    let start = Instant::now();
    let labels = enumerate_valid(&[name("a")], &[Key(1), Key(2)], 3);
    let table = decide_all(&labels);
    let o = criterion_5(&labels, &table);
    ok &= report(
        5,
        "complementarity",
        "zero counterexamples, under 60 s",
        Some(secs(60)),
        start.elapsed(),
        o,
    );

    let start = Instant::now();
    let o = criterion_6(&labels, &table);
    ok &= report(
        6,
        "connected labels have connected transitions",
        "zero oracle rejections",
        None,
        start.elapsed(),
        o,
    );

    let start = Instant::now();
    let o = criterion_7(&labels);
    ok &= report(
        7,
        "realisation",
        "zero rejections",
        None,
        start.elapsed(),
        o,
    );

    let start = Instant::now();
    let o = criterion_8(&corpus);
    ok &= report(8, "origins", "exact", None, start.elapsed(), o);

    let start = Instant::now();
    let o = criterion_9(&labels, &table);
    ok &= report(
        9,
        "relation algebra",
        "zero symmetry or irreflexivity counterexamples",
        None,
        start.elapsed(),
        o,
    );

    let start = Instant::now();
    let o = criterion_10();
    ok &= report(
        10,
        "determinism",
        "byte-identical output",
        None,
        start.elapsed(),
        o,
    );

    if ok {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria fail");
        ExitCode::FAILURE
    }
}
