//! Combined-transition graphs, paths, reachability and origins.
//!
//! Graph states are processes up to alpha-renaming of bound names and
//! bijective renaming of keys. Paths returned by queries are literal: they
//! start at the process given and every step is derivable, so their final
//! process agrees with the requested state up to those renamings.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lts::{
    backward_steps, check_transition, combined_steps, derive, forward_steps, reverse,
};
use crate::lts::{Direction, FreshKeyPolicy, Transition};
use crate::prooflabels::{Decorator, ProofLabel};
use crate::syntax::{canonicalize, is_std, keys_of, normalize_keys, Key, Process};

pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("state space exceeds the cap of {cap} states")]
    StateCap { cap: usize },
    #[error("{0} is not a state of the graph")]
    NotInGraph(String),
    #[error("{0} is not reachable from any standard process")]
    NotReachable(String),
    #[error("{process} has {count} standard states in its component")]
    NonUniqueOrigin { process: String, count: usize },
}

/// The representative of `p` used as a graph state.
pub fn state_of(p: &Process) -> Process {
    normalize_keys(&canonicalize(p))
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub src: usize,
    pub tgt: usize,
    pub transition: Transition,
}

/// Closure of one or more roots under forward and backward steps.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    roots: Vec<usize>,
    states: Vec<Process>,
    index: HashMap<Process, usize>,
    forward: Vec<Edge>,
    backward: Vec<Edge>,
    succ: Vec<Vec<usize>>,
}

pub fn build_graph(root: &Process) -> Result<TransitionGraph, ReachError> {
    build_graph_with(std::slice::from_ref(root), DEFAULT_STATE_CAP)
}

/// Breadth-first closure from every root in turn. States are numbered in
/// discovery order, so the result is deterministic.
pub fn build_graph_with(
    roots: &[Process],
    state_cap: usize,
) -> Result<TransitionGraph, ReachError> {
    let mut g = TransitionGraph {
        roots: Vec::new(),
        states: Vec::new(),
        index: HashMap::new(),
        forward: Vec::new(),
        backward: Vec::new(),
        succ: Vec::new(),
    };
    let mut queue = VecDeque::new();
    for root in roots {
        let (id, fresh) = g.intern(state_of(root), state_cap)?;
        if fresh {
            queue.push_back(id);
        }
        g.roots.push(id);
    }
    while let Some(id) = queue.pop_front() {
        let state = g.states[id].clone();
        let fwd = forward_steps(&state, FreshKeyPolicy::LeastAbsent);
        let bwd = backward_steps(&state);
        for (dir, steps) in [(Direction::Forward, fwd), (Direction::Backward, bwd)] {
            for t in steps {
                let (tgt, fresh) = g.intern(state_of(&t.target), state_cap)?;
                if fresh {
                    queue.push_back(tgt);
                }
                if !g.succ[id].contains(&tgt) {
                    g.succ[id].push(tgt);
                }
                let edge = Edge {
                    src: id,
                    tgt,
                    transition: t,
                };
                match dir {
                    Direction::Forward => g.forward.push(edge),
                    Direction::Backward => g.backward.push(edge),
                }
            }
        }
    }
    Ok(g)
}

impl TransitionGraph {
    fn intern(&mut self, state: Process, cap: usize) -> Result<(usize, bool), ReachError> {
        if let Some(&id) = self.index.get(&state) {
            return Ok((id, false));
        }
        if self.states.len() >= cap {
            return Err(ReachError::StateCap { cap });
        }
        let id = self.states.len();
        self.index.insert(state.clone(), id);
        self.states.push(state);
        self.succ.push(Vec::new());
        Ok((id, true))
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn states(&self) -> &[Process] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &Process {
        &self.states[id]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Forward edges in discovery order. Backward duals are implied.
    pub fn edges(&self) -> &[Edge] {
        &self.forward
    }

    /// Backward steps of every state, in discovery order.
    pub fn backward_edges(&self) -> &[Edge] {
        &self.backward
    }

    /// Every transition of every state, forward edges first.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.forward.iter().chain(&self.backward)
    }

    pub fn id_of(&self, p: &Process) -> Option<usize> {
        self.index.get(&state_of(p)).copied()
    }

    pub fn contains(&self, p: &Process) -> bool {
        self.id_of(p).is_some()
    }

    pub fn standard_states(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| is_std(&self.states[i]))
            .collect()
    }

    /// Connected components, each listed in increasing state order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.states.len()];
        let mut undirected = vec![Vec::new(); self.states.len()];
        for (u, vs) in self.succ.iter().enumerate() {
            for &v in vs {
                undirected[u].push(v);
                undirected[v].push(u);
            }
        }
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..self.states.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![start];
            comp[start] = c;
            let mut i = 0;
            while i < members.len() {
                for &v in &undirected[members[i]] {
                    if comp[v] == usize::MAX {
                        comp[v] = c;
                        members.push(v);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Shortest sequence of state ids from `from` to `to`, inclusive.
    fn bfs(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.states.len()];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut route = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    route.push(cur);
                }
                route.reverse();
                return Some(route);
            }
            for &v in &self.succ[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Graphviz rendering: one node per state, forward edges only.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if is_std(s) { ", shape=box" } else { "" };
            out.push_str(&format!(
                "  s{i} [label=\"{}\"{shape}];\n",
                dot_escape(&s.to_string())
            ));
        }
        for e in &self.forward {
            out.push_str(&format!(
                "  s{} -> s{} [label=\"{}\"];\n",
                e.src,
                e.tgt,
                dot_escape(&e.transition.label.to_string())
            ));
        }
        out.push_str("}\n");
        out
    }

    /// `{"states":[...],"edges":[{"src":..,"dir":"F","label":..,"tgt":..}]}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct EdgeOut {
            src: usize,
            dir: Direction,
            label: String,
            tgt: usize,
        }
        #[derive(Serialize)]
        struct GraphOut {
            states: Vec<String>,
            edges: Vec<EdgeOut>,
        }
        let out = GraphOut {
            states: self.states.iter().map(|s| s.to_string()).collect(),
            edges: self
                .forward
                .iter()
                .map(|e| EdgeOut {
                    src: e.src,
                    dir: Direction::Forward,
                    label: e.transition.label.to_string(),
                    tgt: e.tgt,
                })
                .collect(),
        };
        serde_json::to_string(&out).expect("graph serializes")
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A sequence of composable transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub source: Process,
    pub target: Process,
    pub steps: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step from {found} does not continue a path ending at {expected}")]
pub struct NotComposable {
    pub expected: String,
    pub found: String,
}

impl Path {
    pub fn empty(p: Process) -> Path {
        Path {
            source: p.clone(),
            target: p,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, t: Transition) -> Result<(), NotComposable> {
        if t.source != self.target {
            return Err(NotComposable {
                expected: self.target.to_string(),
                found: t.source.to_string(),
            });
        }
        self.target = t.target.clone();
        self.steps.push(t);
        Ok(())
    }

    /// Composable, and every step carries a derivation that checks.
    pub fn verify(&self) -> bool {
        let mut at = &self.source;
        for t in &self.steps {
            if &t.source != at || !check_transition(t) {
                return false;
            }
            at = &t.target;
        }
        at == &self.target
    }

    /// The same path walked backwards, each step reversed.
    pub fn reversed(&self) -> Option<Path> {
        let mut out = Path::empty(self.target.clone());
        for t in self.steps.iter().rev() {
            out.push(reverse(t).ok()?).ok()?;
        }
        Some(out)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "{} (empty path)", self.source);
        }
        for (i, t) in self.steps.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Replays a route of state ids starting from the literal process `from`.
fn materialize(g: &TransitionGraph, from: &Process, route: &[usize]) -> Path {
    let mut path = Path::empty(from.clone());
    for &next in &route[1..] {
        let want = &g.states[next];
        let step = combined_steps(&path.target)
            .into_iter()
            .find(|t| &state_of(&t.target) == want)
            .expect("graph edges are realisable from equivalent processes");
        path.push(step).expect("steps start at the path target");
    }
    path
}

fn key_sequence(p: &Process, out: &mut Vec<Key>) {
    match p {
        Process::Nil => {}
        Process::Prefix(_, x) | Process::Restrict(_, x) => key_sequence(x, out),
        Process::Keyed(_, k, x) => {
            out.push(*k);
            key_sequence(x, out);
        }
        Process::Sum(x, y) | Process::Par(x, y) => {
            key_sequence(x, out);
            key_sequence(y, out);
        }
    }
}

fn with_key(t: &ProofLabel, k: Key) -> ProofLabel {
    match t {
        ProofLabel::Base { path, label, .. } => ProofLabel::base(path.clone(), label.clone(), k),
        ProofLabel::Sync { path, left, right } => {
            let mut left = left.clone();
            let mut right = right.clone();
            left.key = k;
            right.key = k;
            ProofLabel::sync(path.clone(), left, right)
        }
    }
}

/// Re-keys the events created along `path` so that it ends at `goal`
/// itself rather than a key renaming of it. Keys of `goal` go to the events
/// that survive to the end; events undone later get keys unused elsewhere.
/// Every step is re-derived; `None` if the renaming does not go through.
fn fit_keys(path: &Path, goal: &Process) -> Option<Path> {
    let (mut ours, mut theirs) = (Vec::new(), Vec::new());
    key_sequence(&path.target, &mut ours);
    key_sequence(goal, &mut theirs);
    if ours.len() != theirs.len() {
        return None;
    }
    let at_end: HashMap<Key, Key> = ours.into_iter().zip(theirs.iter().copied()).collect();
    let mut spare = path
        .steps
        .iter()
        .flat_map(|t| keys_of(&t.source))
        .chain(theirs)
        .map(|k| k.0)
        .max()
        .map_or(0, |m| m + 1);

    let mut live: HashMap<Key, Key> = keys_of(&path.source).into_iter().map(|k| (k, k)).collect();
    let mut out = Path::empty(path.source.clone());
    for (i, t) in path.steps.iter().enumerate() {
        let k = t.label.view().key();
        let image = match t.direction {
            Direction::Forward => {
                let undone = path.steps[i + 1..]
                    .iter()
                    .any(|u| u.direction == Direction::Backward && u.label.view().key() == k);
                let image = if undone {
                    spare += 1;
                    Key(spare - 1)
                } else {
                    *at_end.get(&k)?
                };
                live.insert(k, image);
                image
            }
            Direction::Backward => live.remove(&k)?,
        };
        let step = derive(&out.target, t.direction, &with_key(&t.label, image))?;
        out.push(step).ok()?;
    }
    (&out.target == goal).then_some(out)
}

/// A shortest combined path from `x` to `y`. The path ends at `y` itself
/// unless some key of `x` that survives the path is named differently in
/// `y`; then it ends at a key renaming of `y`.
pub fn find_path(
    g: &TransitionGraph,
    x: &Process,
    y: &Process,
) -> Result<Option<Path>, ReachError> {
    let from = g
        .id_of(x)
        .ok_or_else(|| ReachError::NotInGraph(x.to_string()))?;
    let to = g
        .id_of(y)
        .ok_or_else(|| ReachError::NotInGraph(y.to_string()))?;
    Ok(g.bfs(from, to).map(|route| {
        let path = materialize(g, x, &route);
        if &path.target == y {
            path
        } else {
            fit_keys(&path, y).unwrap_or(path)
        }
    }))
}

pub fn is_reachable(p: &Process) -> Result<bool, ReachError> {
    is_reachable_with(p, DEFAULT_STATE_CAP)
}

pub fn is_reachable_with(p: &Process, state_cap: usize) -> Result<bool, ReachError> {
    let g = build_graph_with(std::slice::from_ref(p), state_cap)?;
    Ok(!g.standard_states().is_empty())
}

pub fn origin(p: &Process) -> Result<Process, ReachError> {
    origin_with(p, DEFAULT_STATE_CAP)
}

/// The standard process `p` can be rewound to. Errors if there is none, or
/// if the component holds more than one standard state.
pub fn origin_with(p: &Process, state_cap: usize) -> Result<Process, ReachError> {
    let g = build_graph_with(std::slice::from_ref(p), state_cap)?;
    let std_states = g.standard_states();
    match std_states.as_slice() {
        [] => Err(ReachError::NotReachable(p.to_string())),
        [only] => {
            let route = g
                .bfs(g.roots[0], *only)
                .expect("graph is connected from its root");
            Ok(materialize(&g, p, &route).target)
        }
        many => Err(ReachError::NonUniqueOrigin {
            process: p.to_string(),
            count: many.len(),
        }),
    }
}

/// A path from the source of `t1` to the source of `t2`, if they are
/// connected.
pub fn connected(t1: &Transition, t2: &Transition) -> Result<Option<Path>, ReachError> {
    connected_with(t1, t2, DEFAULT_STATE_CAP)
}

pub fn connected_with(
    t1: &Transition,
    t2: &Transition,
    state_cap: usize,
) -> Result<Option<Path>, ReachError> {
    let g = build_graph_with(std::slice::from_ref(&t1.source), state_cap)?;
    if !g.contains(&t2.source) {
        return Ok(None);
    }
    find_path(&g, &t1.source, &t2.source)
}

/// Undoes steps, depth first, until a standard process is reached. Every
/// backward step removes a key, so the search terminates.
pub fn rewind(p: &Process) -> Option<Path> {
    fn go(path: &mut Path) -> bool {
        if is_std(&path.target) {
            return true;
        }
        for t in backward_steps(&path.target) {
            let saved = path.target.clone();
            path.push(t).expect("steps start at the path target");
            if go(path) {
                return true;
            }
            path.steps.pop();
            path.target = saved;
        }
        false
    }
    let mut path = Path::empty(p.clone());
    go(&mut path).then_some(path)
}

/// Restricts a path between sums to the steps of their left addends.
/// Returns `None` if some process on the path is not a sum.
pub fn project_left_addend(path: &Path) -> Option<Path> {
    fn left(p: &Process) -> Option<&Process> {
        match p {
            Process::Sum(x, _) => Some(x),
            _ => None,
        }
    }
    let mut out = Path::empty(left(&path.source)?.clone());
    for t in &path.steps {
        left(&t.target)?;
        match t.label.path().first() {
            Some(Decorator::SumL) => {
                let inner = strip_head(&t.label);
                let step = derive(&out.target, t.direction, &inner)?;
                out.push(step).ok()?;
            }
            Some(Decorator::SumR) => {}
            _ => return None,
        }
    }
    (&out.target == left(&path.target)?).then_some(out)
}

fn strip_head(label: &ProofLabel) -> ProofLabel {
    label.view().tail().to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Process {
        parse(s).unwrap()
    }

    #[test]
    fn example_one_graph() {
        let g = build_graph(&p("m | l")).unwrap();
        let states: Vec<String> = g.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(states, ["m | l", "m[0] | l", "m | l[0]", "m[0] | l[1]"]);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.backward_edges().len(), 4);
    }

    #[test]
    fn nil_graph() {
        let g = build_graph(&Process::Nil).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.edges().is_empty());
        assert_eq!(g.to_json(), r#"{"states":["0"],"edges":[]}"#);
    }

    #[test]
    fn example_two_run_is_in_the_graph() {
        let g = build_graph(&p("a.b | ~b")).unwrap();
        for s in ["a[0].b | ~b", "a[0].b[1] | ~b[1]"] {
            assert!(g.contains(&p(s)), "{s}");
        }
        assert!(g
            .edges()
            .iter()
            .any(|e| matches!(e.transition.label, ProofLabel::Sync { .. })));
    }

    #[test]
    fn paths() {
        let g = build_graph(&p("m | l")).unwrap();
        let x = p("m | l");
        assert!(find_path(&g, &x, &x).unwrap().unwrap().is_empty());
        let path = find_path(&g, &x, &p("m[0] | l[1]")).unwrap().unwrap();
        assert_eq!(path.len(), 2);
        assert!(path.verify());
        assert!(path.reversed().unwrap().verify());
        assert!(matches!(
            find_path(&g, &x, &p("a")),
            Err(ReachError::NotInGraph(_))
        ));
    }

    #[test]
    fn paths_end_at_the_literal_goal() {
        let x = p("a.b | ~b");
        let g = build_graph(&x).unwrap();
        let path = find_path(&g, &x, &p("a[1].b | ~b")).unwrap().unwrap();
        assert_eq!(path.target, p("a[1].b | ~b"));
        // key 5 is undone on the way, so it is renamed away from the goal's keys
        let from = p("a[5].b | ~b");
        let to = p("a[5].b[2] | ~b[2]");
        let path = find_path(&g, &from, &to).unwrap().unwrap();
        assert_eq!(path.target, to);
        assert!(path.verify());
        // a surviving key cannot change its name
        let to = p("a[2].b[5] | ~b[5]");
        let path = find_path(&g, &from, &to).unwrap().unwrap();
        assert_eq!(path.target, p("a[5].b[0] | ~b[0]"));
        assert!(path.verify());
        let path = find_path(&g, &p("a[0].b | ~b"), &p("a[1].b | ~b"))
            .unwrap()
            .unwrap();
        assert!(path.is_empty());
    }

    #[test]
    fn disjoint_roots_have_no_path() {
        let g = build_graph_with(&[p("a"), p("b")], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(g.components().len(), 2);
        assert!(find_path(&g, &p("a"), &p("b[0]")).unwrap().is_none());
    }

    #[test]
    fn reachability_and_origins() {
        assert!(is_reachable(&p("m[0] | l")).unwrap());
        assert!(!is_reachable(&p("a[1].b[1]")).unwrap());
        assert!(!is_reachable(&p("a[1].b[2] | ~b[2].~a[1]")).unwrap());
        assert_eq!(origin(&p("m[0] | l")).unwrap(), p("m | l"));
        assert_eq!(origin(&p("a.b + c")).unwrap(), p("a.b + c"));
        assert_eq!(origin(&p("a[0].b[1] | 0")).unwrap(), p("a.b | 0"));
        assert!(matches!(
            origin(&p("a[1].b[1]")),
            Err(ReachError::NotReachable(_))
        ));
    }

    #[test]
    fn rewinding() {
        let path = rewind(&p("a[0].b[1] | 0")).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path.target, p("a.b | 0"));
        assert!(path
            .steps
            .iter()
            .all(|t| t.direction == Direction::Backward));
        assert!(rewind(&p("a[1].b[1]")).is_none());
    }

    #[test]
    fn connected_transitions() {
        let x = p("a.b | ~b");
        let t1 = forward_steps(&x, FreshKeyPolicy::LeastAbsent).remove(0);
        let t2 = forward_steps(&t1.target, FreshKeyPolicy::LeastAbsent).remove(0);
        let link = connected(&t1, &t2).unwrap().unwrap();
        assert_eq!(link.steps, std::slice::from_ref(&t1));
        assert!(connected(&t1, &t1).unwrap().unwrap().is_empty());
        let other = forward_steps(&p("b"), FreshKeyPolicy::LeastAbsent).remove(0);
        let first = forward_steps(&p("a"), FreshKeyPolicy::LeastAbsent).remove(0);
        assert!(connected(&first, &other).unwrap().is_none());
    }

    #[test]
    fn state_cap_is_an_error() {
        assert_eq!(
            build_graph_with(&[p("a | b | c")], 3).unwrap_err(),
            ReachError::StateCap { cap: 3 }
        );
    }

    #[test]
    fn left_addend_projection() {
        let g = build_graph(&p("(a.b | ~b) + c")).unwrap();
        let x = p("(a.b | ~b) + c");
        let y = p("(a[0].b[1] | ~b[1]) + c");
        let path = find_path(&g, &x, &y).unwrap().unwrap();
        let proj = project_left_addend(&path).unwrap();
        assert!(proj.verify());
        assert_eq!(proj.source, p("a.b | ~b"));
        assert_eq!(proj.target, p("a[0].b[1] | ~b[1]"));
    }

    #[test]
    fn dot_escapes_restrictions() {
        let dot = build_graph(&p("(a)\\b")).unwrap().to_dot();
        assert!(dot.contains(r#"label="(a)\\n0""#), "{dot}");
    }
}
