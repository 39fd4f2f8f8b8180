use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::causality::{check, check_conn, check_derivation, holds, Relation};
use crate::corpus::{example_processes, Scale};
use crate::lts::{derive, reverse, Direction, Transition};
use crate::prooflabels::{is_valid, ProofLabel};
use crate::reach::{
    build_graph_with, find_path, project_left_addend, rewind, state_of, ReachError, TransitionGraph,
};
use crate::syntax::{is_std, keys_of, Process};

use super::{realise, realize_connected, Report};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Suite {
    Loop,
    Validity,
    Thm1,
    Thm2,
    Lemmas,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["loop", "validity", "thm1", "thm2", "lemmas", "all"];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Suite::NAMES[i])
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "loop" => Suite::Loop,
            "validity" => Suite::Validity,
            "thm1" => Suite::Thm1,
            "thm2" => Suite::Thm2,
            "lemmas" => Suite::Lemmas,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

/// Corpora are built on first use and shared between suites.
struct Context<'s> {
    scale: &'s Scale,
    graphs: Option<Vec<(Process, TransitionGraph)>>,
    labels: Option<Vec<ProofLabel>>,
    table: Option<RelationTable>,
}

impl<'s> Context<'s> {
    fn graphs(&mut self) -> Result<&[(Process, TransitionGraph)], ReachError> {
        if self.graphs.is_none() {
            let mut out = Vec::new();
            for p in self.scale.process_corpus() {
                let g = build_graph_with(std::slice::from_ref(&p), self.scale.state_cap)?;
                out.push((p, g));
            }
            self.graphs = Some(out);
        }
        Ok(self.graphs.as_deref().expect("just built"))
    }

    fn process_corpus(&mut self) -> Result<String, ReachError> {
        let n = self.graphs()?.len();
        Ok(format!(
            "{n} processes (<= {} operators over {{{}}}, plus examples)",
            self.scale.max_size,
            self.scale
                .names
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ))
    }

    fn labels(&mut self) -> &[ProofLabel] {
        let scale = self.scale;
        self.labels.get_or_insert_with(|| scale.label_corpus())
    }

    fn label_corpus(&mut self) -> String {
        let n = self.labels().len();
        label_corpus_text(n, self.scale)
    }

    fn table(&mut self) -> &RelationTable {
        if self.table.is_none() {
            let t = relation_table(self.labels());
            self.table = Some(t);
        }
        self.table.as_ref().expect("just built")
    }
}

fn label_corpus_text(n: usize, scale: &Scale) -> String {
    let join = |xs: Vec<String>| xs.join(",");
    format!(
        "{n} valid labels (names {{{}}}, keys {{{}}}, <= {} decorators)",
        join(scale.label_names.iter().map(|x| x.to_string()).collect()),
        join(scale.keys.iter().map(|x| x.to_string()).collect()),
        scale.depth
    )
}

/// Runs one suite, or all of them, at the given scale.
pub fn run_suite(suite: Suite, scale: &Scale) -> Result<Vec<Report>, ReachError> {
    let mut cx = Context {
        scale,
        graphs: None,
        labels: None,
        table: None,
    };
    let selected: &[Suite] = match suite {
        Suite::All => &[
            Suite::Loop,
            Suite::Validity,
            Suite::Thm1,
            Suite::Thm2,
            Suite::Lemmas,
        ],
        _ => std::slice::from_ref(&suite),
    };
    let mut out = Vec::new();
    for s in selected {
        match s {
            Suite::Loop => out.extend(loop_reports(&mut cx)?),
            Suite::Validity => out.push(validity_report(&mut cx)?),
            Suite::Thm1 => {
                out.push(theorem1_forward_report(&mut cx)?);
                let corpus = cx.label_corpus();
                let mut r = verify_connected_witnesses(cx.labels());
                r.corpus = corpus;
                out.push(r);
            }
            Suite::Thm2 => {
                let corpus = cx.label_corpus();
                let mut r = complementarity_from(cx.table());
                r.corpus = corpus.clone();
                out.push(r);
                let table = cx.table.as_ref().expect("built above");
                let mut r = derivation_agreement(
                    cx.labels.as_deref().expect("built with the table"),
                    table,
                );
                r.corpus = corpus;
                out.push(r);
            }
            Suite::Lemmas => out.extend(lemma_reports(&mut cx)?),
            Suite::All => unreachable!("expanded above"),
        }
    }
    Ok(out)
}

fn edges_of(g: &TransitionGraph) -> impl Iterator<Item = &Transition> {
    g.all_edges().map(|e| &e.transition)
}

fn loop_reports(cx: &mut Context<'_>) -> Result<Vec<Report>, ReachError> {
    let corpus = cx.process_corpus()?;
    let mut looped = Report::new("loop", "loop lemma", &corpus);
    let mut sound = Report::new("loop", "enumerated steps re-derive", &corpus);
    let mut keys = Report::new("loop", "key conservation", &corpus);
    let mut standard = Report::new("loop", "standard states have no backward steps", &corpus);
    for (_, g) in cx.graphs()? {
        for t in edges_of(g) {
            let back = reverse(t);
            let ok = back.as_ref().is_ok_and(|r| {
                r.direction != t.direction && r.label == t.label && reverse(r).as_ref() == Ok(t)
            });
            looped.check(ok, || format!("{t}"));

            let again = derive(&t.source, t.direction, &t.label);
            sound.check(
                again.as_ref() == Some(t) && crate::lts::check_transition(t),
                || format!("{t}"),
            );

            let k = t.label.view().key();
            let (before, after) = (keys_of(&t.source), keys_of(&t.target));
            let ok = match t.direction {
                Direction::Forward => !before.contains(&k) && after == with(&before, k),
                Direction::Backward => before.contains(&k) && after == without(&before, k),
            };
            keys.check(ok, || format!("{t}"));
        }
        let std_ids: BTreeSet<usize> = g.standard_states().into_iter().collect();
        let backward_from_std = g
            .backward_edges()
            .iter()
            .filter(|e| std_ids.contains(&e.src))
            .count();
        standard.check_n(std_ids.len() as u64, backward_from_std == 0, || {
            format!(
                "a standard state of the graph of {} steps backward",
                g.state(g.roots()[0])
            )
        });
    }
    looped.count("transitions", looped.checked);
    Ok(vec![looped, sound, keys, standard])
}

fn with(ks: &BTreeSet<crate::syntax::Key>, k: crate::syntax::Key) -> BTreeSet<crate::syntax::Key> {
    let mut out = ks.clone();
    out.insert(k);
    out
}

fn without(
    ks: &BTreeSet<crate::syntax::Key>,
    k: crate::syntax::Key,
) -> BTreeSet<crate::syntax::Key> {
    let mut out = ks.clone();
    out.remove(&k);
    out
}

fn validity_report(cx: &mut Context<'_>) -> Result<Report, ReachError> {
    let mut r = Report::new(
        "validity",
        "transition labels are valid",
        cx.process_corpus()?,
    );
    for (_, g) in cx.graphs()? {
        for t in edges_of(g) {
            r.check(is_valid(&t.label), || format!("{t}"));
        }
    }
    Ok(r)
}

/// For every two transitions of `g` whose sources are connected and
/// reachable, their labels are connected.
pub fn verify_theorem1_forward(g: &TransitionGraph) -> Report {
    let mut r = Report::new(
        "thm1",
        "connected transitions have connected labels",
        "one graph",
    );
    let mut component = vec![0; g.len()];
    let comps = g.components();
    for (c, members) in comps.iter().enumerate() {
        for &s in members {
            component[s] = c;
        }
    }
    // distinct labels per component, with multiplicities
    let mut by_comp: Vec<HashMap<&ProofLabel, u64>> = vec![HashMap::new(); comps.len()];
    for e in g.all_edges() {
        *by_comp[component[e.src]]
            .entry(&e.transition.label)
            .or_insert(0) += 1;
    }
    for (members, labels) in comps.iter().zip(by_comp) {
        if !members.iter().any(|&s| is_std(g.state(s))) {
            r.count("unreachable components skipped", 1);
            continue;
        }
        let mut labels: Vec<(&ProofLabel, u64)> = labels.into_iter().collect();
        labels.sort();
        r.count("transitions", labels.iter().map(|(_, m)| m).sum());
        for &(a, ma) in &labels {
            for &(b, mb) in &labels {
                r.check_n(ma * mb, holds(Relation::Conn, a, b), || {
                    format!("{a} / {b}")
                });
            }
        }
    }
    r
}

fn theorem1_forward_report(cx: &mut Context<'_>) -> Result<Report, ReachError> {
    let mut total = Report::new(
        "thm1",
        "connected transitions have connected labels",
        cx.process_corpus()?,
    );
    for (_, g) in cx.graphs()? {
        total.merge(verify_theorem1_forward(g));
    }
    Ok(total)
}

/// Builds and checks a witness for every ordered pair of connected labels.
pub fn verify_connected_witnesses(labels: &[ProofLabel]) -> Report {
    let mut r = Report::new(
        "thm1",
        "connected labels have connected forward transitions",
        "labels",
    );
    for a in labels {
        for b in labels {
            let Some(d) = check_conn(a, b) else { continue };
            if !check_derivation(&d, a, b) {
                r.check(false, || format!("derivation of {a} ⌣ {b} rejected"));
                continue;
            }
            match realize_connected(&d, a, b) {
                Ok(w) => {
                    r.check(true, String::new);
                    let tau = a.view().is_tau() || b.view().is_tau();
                    r.count(if tau { "general case" } else { "base case" }, 1);
                    r.count(&format!("link length {}", w.link.len()), 1);
                }
                Err(e) => r.check(false, || format!("{a} ⌣ {b}: {e}")),
            }
        }
    }
    r
}

/// ⌣, ⊗ and ι on every ordered pair of a label list, as bit matrices.
pub struct RelationTable {
    n: usize,
    bits: [Vec<u64>; 3],
}

impl RelationTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, rel: Relation, i: usize, j: usize) -> bool {
        let idx = i * self.n + j;
        self.bits[rel as usize][idx / 64] >> (idx % 64) & 1 == 1
    }
}

pub fn relation_table(labels: &[ProofLabel]) -> RelationTable {
    let n = labels.len();
    let words = (n * n).div_ceil(64);
    let mut bits = [vec![0u64; words], vec![0u64; words], vec![0u64; words]];
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            let idx = i * n + j;
            for rel in Relation::ALL {
                if holds(rel, a, b) {
                    bits[rel as usize][idx / 64] |= 1 << (idx % 64);
                }
            }
        }
    }
    RelationTable { n, bits }
}

/// ι ⇒ ⌣, ⊗ ⇒ ⌣, and ⌣ ⇔ exactly one of ι and ⊗, on every ordered pair.
pub fn verify_complementarity(labels: &[ProofLabel]) -> Report {
    let mut r = complementarity_from(&relation_table(labels));
    r.corpus = format!("{} labels", labels.len());
    r
}

fn complementarity_from(t: &RelationTable) -> Report {
    let mut r = Report::new(
        "thm2",
        "complementarity of dependence and independence",
        "labels",
    );
    for i in 0..t.n {
        for j in 0..t.n {
            let (c, d, ind) = (
                t.get(Relation::Conn, i, j),
                t.get(Relation::Dep, i, j),
                t.get(Relation::Indep, i, j),
            );
            r.check(!ind || c, || format!("indep without conn at ({i}, {j})"));
            r.check(!d || c, || format!("dep without conn at ({i}, {j})"));
            r.check(c == (d ^ ind), || {
                format!("conn={c} dep={d} indep={ind} at ({i}, {j})")
            });
            for (rel, holds) in [("conn", c), ("dep", d), ("indep", ind)] {
                if holds {
                    r.count(&format!("{rel} pairs"), 1);
                }
            }
        }
    }
    r.count("ordered pairs", (t.n * t.n) as u64);
    r
}

/// Every positive decision comes with a derivation the checker accepts.
fn derivation_agreement(labels: &[ProofLabel], t: &RelationTable) -> Report {
    let mut r = Report::new("thm2", "decisions carry checkable derivations", "labels");
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            for rel in Relation::ALL {
                if t.get(rel, i, j) {
                    let ok = check(rel, a, b)
                        .is_some_and(|d| d.relation == rel && check_derivation(&d, a, b));
                    r.check(ok, || format!("{a} {rel} {b}"));
                }
            }
        }
    }
    r
}

/// Symmetry of all three relations, irreflexivity of ι, and reflexivity
/// of ⊗ and ⌣ (reported as expectations).
pub fn verify_relation_algebra(labels: &[ProofLabel]) -> Vec<Report> {
    let mut out = relation_algebra_from(labels, &relation_table(labels));
    for r in &mut out {
        r.corpus = format!("{} labels", labels.len());
    }
    out
}

fn relation_algebra_from(labels: &[ProofLabel], t: &RelationTable) -> Vec<Report> {
    let mut symmetric = Report::new("lemmas", "relations are symmetric", "labels");
    let mut irreflexive = Report::new("lemmas", "independence is irreflexive", "labels");
    let mut dep_refl = Report::new("lemmas", "dependence is reflexive", "labels").expectation();
    let mut conn_refl = Report::new("lemmas", "connectivity is reflexive", "labels").expectation();
    for i in 0..t.n {
        for j in 0..t.n {
            for rel in Relation::ALL {
                symmetric.check(t.get(rel, i, j) == t.get(rel, j, i), || {
                    format!("{} {rel} {} but not conversely", labels[i], labels[j])
                });
            }
        }
        irreflexive.check(!t.get(Relation::Indep, i, i), || {
            format!("{} ι itself", labels[i])
        });
        dep_refl.check(t.get(Relation::Dep, i, i), || {
            format!("not {} ⊗ itself", labels[i])
        });
        conn_refl.check(t.get(Relation::Conn, i, i), || {
            format!("not {} ⌣ itself", labels[i])
        });
    }
    vec![symmetric, irreflexive, dep_refl, conn_refl]
}

fn lemma_reports(cx: &mut Context<'_>) -> Result<Vec<Report>, ReachError> {
    let label_corpus = cx.label_corpus();
    let mut realisation = Report::new("lemmas", "every label is realised", &label_corpus);
    for t in cx.labels() {
        let res = realise(t);
        realisation.check(res.is_ok(), || format!("{t}: {}", res.unwrap_err()));
    }

    let corpus = cx.process_corpus()?;
    let cap = cx.scale.state_cap;
    let mut unique = Report::new("lemmas", "unique standard state per graph", &corpus);
    let mut rewound = Report::new("lemmas", "rewinding reaches the origin", &corpus);
    let mut lemma1 = Report::new("lemmas", "paths exist iff origins agree", &corpus);
    let mut sums = Report::new("lemmas", "paths from sums stay sums and project", &corpus);
    let graphs = cx.graphs()?;
    let standard_roots: Vec<&Process> = graphs
        .iter()
        .map(|(p, _)| p)
        .filter(|p| is_std(p))
        .collect();
    for (root, g) in graphs {
        if !is_std(root) {
            continue;
        }
        let stds = g.standard_states();
        unique.check(stds.len() == 1, || {
            format!("{root}: {} standard states", stds.len())
        });
        let origin = g.state(stds[0]);
        for s in g.states() {
            let back = rewind(s);
            rewound.check(
                back.is_some_and(|p| p.verify() && &state_of(&p.target) == origin),
                || format!("{s} does not rewind to {origin}"),
            );
        }
        // one component: every state has a path to every other
        lemma1.check(g.components().len() == 1, || {
            format!("graph of {root} is not connected")
        });

        if let Process::Sum(..) = root {
            for s in g.states() {
                let ok = find_path(g, root, s).ok().flatten().is_some_and(|path| {
                    matches!(path.target, Process::Sum(..))
                        && project_left_addend(&path).is_some_and(|proj| proj.verify())
                });
                sums.check(ok, || format!("path from {root} to {s}"));
            }
        }
    }
    // distinct standard processes never share a component
    for pair in standard_roots.windows(2) {
        let g = build_graph_with(&[pair[0].clone(), pair[1].clone()], cap)?;
        let apart = find_path(&g, pair[0], pair[1]).ok().flatten().is_none();
        lemma1.check(apart && g.components().len() == 2, || {
            format!("{} and {} are connected", pair[0], pair[1])
        });
    }

    let mut faulty = Report::new(
        "lemmas",
        "inconsistent keys are unreachable",
        "fixed examples",
    );
    for p in example_processes().iter().filter(|p| !is_std(p)) {
        let g = build_graph_with(std::slice::from_ref(p), cap)?;
        faulty.check(g.standard_states().is_empty(), || {
            format!("{p} is reachable")
        });
        if g.len() == 1 {
            faulty.count(
                &format!("{p}: enabled transitions"),
                g.all_edges().count() as u64,
            );
        }
    }

    let mut out = vec![realisation, unique, rewound, lemma1, sums, faulty];
    cx.table();
    let table = cx.table.as_ref().expect("just built");
    let labels = cx.labels.as_deref().expect("built with the table");
    for mut r in relation_algebra_from(labels, table) {
        r.corpus = label_corpus.clone();
        out.push(r);
    }
    Ok(out)
}
