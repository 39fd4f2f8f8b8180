use std::collections::BTreeSet;

use ccskp::lts::{
    backward_steps, check_transition, combined_steps, derive, forward_steps, reverse,
};
use ccskp::prooflabels::{is_valid, key_of};
use ccskp::reach::{
    build_graph, build_graph_with, connected, find_path, origin, project_left_addend, rewind,
    state_of, DEFAULT_STATE_CAP,
};
use ccskp::syntax::{canonicalize, is_std, keys_of, Label, Name, Process};
use ccskp::{Direction, FreshKeyPolicy, Transition};
use proptest::prelude::*;

fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

fn arb_label() -> impl Strategy<Value = Label> {
    prop_oneof![
        prop::sample::select(vec!["a", "b"]).prop_map(|n| Label::Input(name(n))),
        prop::sample::select(vec!["a", "b"]).prop_map(|n| Label::Output(name(n))),
        Just(Label::Tau),
    ]
}

fn arb_standard() -> impl Strategy<Value = Process> {
    Just(Process::Nil).prop_recursive(4, 10, 2, |inner| {
        prop_oneof![
            3 => (arb_label(), inner.clone()).prop_map(|(l, x)| Process::prefix(l, x)),
            2 => (inner.clone(), inner.clone()).prop_map(|(x, y)| Process::sum(x, y)),
            2 => (inner.clone(), inner.clone()).prop_map(|(x, y)| Process::par(x, y)),
            1 => inner.prop_map(|x| Process::restrict(name("a"), x)),
        ]
    })
}

/// Follows `choices` through combined steps; each choice picks among the
/// steps enabled at that point.
fn walk(p: &Process, choices: &[usize], forward_only: bool) -> Process {
    let mut cur = p.clone();
    for c in choices {
        let steps = if forward_only {
            forward_steps(&cur, FreshKeyPolicy::LeastAbsent)
        } else {
            combined_steps(&cur)
        };
        if steps.is_empty() {
            break;
        }
        cur = steps[c % steps.len()].target.clone();
    }
    cur
}

fn arb_reachable() -> impl Strategy<Value = (Process, Process)> {
    (arb_standard(), prop::collection::vec(0usize..8, 0..6)).prop_map(|(root, choices)| {
        let state = walk(&root, &choices, false);
        (root, state)
    })
}

/// Forgets every key. In a reachable process this undoes all of its past.
fn erase(p: &Process) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefix(l, x) | Process::Keyed(l, _, x) => Process::prefix(l.clone(), erase(x)),
        Process::Sum(x, y) => Process::sum(erase(x), erase(y)),
        Process::Par(x, y) => Process::par(erase(x), erase(y)),
        Process::Restrict(a, x) => Process::restrict(a.clone(), erase(x)),
    }
}

fn all_steps(p: &Process) -> Vec<Transition> {
    let mut v = forward_steps(p, FreshKeyPolicy::LeastAbsent);
    v.extend(backward_steps(p));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn enumerated_steps_are_derivable((_root, p) in arb_reachable()) {
        for t in all_steps(&p) {
            prop_assert!(check_transition(&t), "{}", t);
            let again = derive(&t.source, t.direction, &t.label);
            prop_assert_eq!(again.map(|u| u.target), Some(t.target.clone()), "{}", t);
        }
    }

    #[test]
    fn loop_lemma((_root, p) in arb_reachable()) {
        for t in all_steps(&p) {
            let r = reverse(&t).unwrap();
            prop_assert_eq!(&r.label, &t.label);
            prop_assert_eq!(r.direction, t.direction.flip());
            prop_assert!(check_transition(&r), "{}", r);
            prop_assert_eq!(reverse(&r).unwrap(), t);
        }
    }

    #[test]
    fn emitted_labels_are_valid((_root, p) in arb_reachable()) {
        for t in all_steps(&p) {
            prop_assert!(is_valid(&t.label), "{}", t);
        }
    }

    #[test]
    fn steps_add_or_remove_their_own_key((_root, p) in arb_reachable()) {
        let before = keys_of(&p);
        for t in all_steps(&p) {
            let k = key_of(&t.label);
            let after = keys_of(&t.target);
            let mut expected: BTreeSet<_> = before.clone();
            match t.direction {
                Direction::Forward => {
                    prop_assert!(!before.contains(&k), "{}", t);
                    expected.insert(k);
                }
                Direction::Backward => {
                    prop_assert!(before.contains(&k), "{}", t);
                    expected.remove(&k);
                }
            }
            prop_assert_eq!(after, expected, "{}", t);
        }
    }

    #[test]
    fn standard_processes_cannot_go_back(p in arb_standard()) {
        prop_assert!(backward_steps(&p).is_empty());
    }

    #[test]
    fn origin_forgets_the_past((root, p) in arb_reachable()) {
        let o = origin(&p).unwrap();
        prop_assert!(is_std(&o));
        prop_assert_eq!(canonicalize(&o), canonicalize(&erase(&p)));
        prop_assert_eq!(canonicalize(&o), canonicalize(&root));
        let back = rewind(&p).unwrap();
        prop_assert!(back.verify());
        prop_assert_eq!(canonicalize(&back.target), canonicalize(&root));
    }

    #[test]
    fn one_standard_state_per_graph(p in arb_standard()) {
        let g = build_graph(&p).unwrap();
        prop_assert_eq!(g.standard_states().len(), 1);
        prop_assert_eq!(g.components().len(), 1);
    }

    #[test]
    fn paths_exist_iff_origins_agree(
        x in arb_standard(),
        y in arb_standard(),
        cx in prop::collection::vec(0usize..8, 0..4),
        cy in prop::collection::vec(0usize..8, 0..4),
    ) {
        let px = walk(&x, &cx, true);
        let py = walk(&y, &cy, true);
        let g = build_graph_with(&[px.clone(), py.clone()], DEFAULT_STATE_CAP).unwrap();
        let same_origin = canonicalize(&erase(&px)) == canonicalize(&erase(&py));
        let there = find_path(&g, &px, &py).unwrap();
        let back = find_path(&g, &py, &px).unwrap();
        prop_assert_eq!(there.is_some(), same_origin);
        prop_assert_eq!(back.is_some(), same_origin);
        if let Some(path) = there {
            prop_assert!(path.verify());
            prop_assert_eq!(state_of(&path.target), state_of(&py));
            prop_assert!(path.reversed().is_some_and(|r| r.verify()));
        }
    }

    #[test]
    fn connectedness_is_symmetric((_root, p) in arb_reachable(), i in 0usize..8, j in 0usize..8) {
        let g = build_graph(&p).unwrap();
        let edges: Vec<_> = g.all_edges().collect();
        prop_assume!(!edges.is_empty());
        let t1 = &edges[i % edges.len()].transition;
        let t2 = &edges[j % edges.len()].transition;
        let ab = connected(t1, t2).unwrap();
        let ba = connected(t2, t1).unwrap();
        prop_assert!(ab.is_some() && ba.is_some());
        prop_assert_eq!(ab.unwrap().len(), ba.unwrap().len());
    }

    #[test]
    fn paths_from_sums_stay_sums_and_project(
        x in arb_standard(),
        y in arb_standard(),
        choices in prop::collection::vec(0usize..8, 0..5),
    ) {
        let root = Process::sum(x, y);
        let end = walk(&root, &choices, false);
        prop_assert!(matches!(end, Process::Sum(..)));
        let g = build_graph(&root).unwrap();
        let path = find_path(&g, &root, &end).unwrap().unwrap();
        prop_assert!(path.steps.iter().all(|t| matches!(t.target, Process::Sum(..))));
        let left = project_left_addend(&path);
        prop_assert!(left.as_ref().is_some_and(|l| l.verify()), "{:?}", left);
    }
}

#[test]
fn distinct_origins_are_not_connected() {
    let a = ccskp::syntax::parse("a").unwrap();
    let b = ccskp::syntax::parse("b").unwrap();
    let ta = forward_steps(&a, FreshKeyPolicy::LeastAbsent).remove(0);
    let tb = forward_steps(&b, FreshKeyPolicy::LeastAbsent).remove(0);
    assert_eq!(connected(&ta, &tb).unwrap(), None);
    assert!(connected(&ta, &ta).unwrap().is_some_and(|p| p.is_empty()));
}
