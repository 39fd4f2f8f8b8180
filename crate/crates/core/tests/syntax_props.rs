use std::collections::BTreeSet;

use ccskp::syntax::{
    canonicalize, is_std, keys_of, parse, pretty_print, Key, Label, Name, Process,
};
use proptest::prelude::*;

fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

fn arb_label() -> impl Strategy<Value = Label> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(|n| Label::Input(name(n))),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(|n| Label::Output(name(n))),
        Just(Label::Tau),
    ]
}

fn arb_process() -> impl Strategy<Value = Process> {
    let leaf = Just(Process::Nil);
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            (arb_label(), inner.clone()).prop_map(|(l, x)| Process::prefix(l, x)),
            (arb_label(), 0u32..4, inner.clone()).prop_map(|(l, k, x)| Process::keyed(
                l,
                Key(k),
                x
            )),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Process::sum(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Process::par(x, y)),
            (prop::sample::select(vec!["a", "b"]), inner)
                .prop_map(|(n, x)| Process::restrict(name(n), x)),
        ]
    })
}

// Key collection written out independently of the library.
fn collect_keys(p: &Process, out: &mut BTreeSet<Key>) {
    match p {
        Process::Nil => {}
        Process::Prefix(_, x) | Process::Restrict(_, x) => collect_keys(x, out),
        Process::Keyed(_, k, x) => {
            out.insert(*k);
            collect_keys(x, out);
        }
        Process::Sum(x, y) | Process::Par(x, y) => {
            collect_keys(x, out);
            collect_keys(y, out);
        }
    }
}

fn any_keyed(p: &Process) -> bool {
    match p {
        Process::Nil => false,
        Process::Keyed(..) => true,
        Process::Prefix(_, x) | Process::Restrict(_, x) => any_keyed(x),
        Process::Sum(x, y) | Process::Par(x, y) => any_keyed(x) || any_keyed(y),
    }
}

fn subst_label(l: &Label, from: &Name, to: &Name) -> Label {
    match l {
        Label::Input(a) if a == from => Label::Input(to.clone()),
        Label::Output(a) if a == from => Label::Output(to.clone()),
        other => other.clone(),
    }
}

/// Replaces free occurrences of `from` by `to`.
fn subst(p: &Process, from: &Name, to: &Name) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefix(l, x) => Process::prefix(subst_label(l, from, to), subst(x, from, to)),
        Process::Keyed(l, k, x) => Process::keyed(subst_label(l, from, to), *k, subst(x, from, to)),
        Process::Sum(x, y) => Process::sum(subst(x, from, to), subst(y, from, to)),
        Process::Par(x, y) => Process::par(subst(x, from, to), subst(y, from, to)),
        Process::Restrict(a, x) if a == from => Process::restrict(a.clone(), (**x).clone()),
        Process::Restrict(a, x) => Process::restrict(a.clone(), subst(x, from, to)),
    }
}

/// Renames every binder to a stem drawn from `pool` by `choice`, suffixed by
/// a running count. Such names never occur in the generated processes and
/// are pairwise distinct, so nothing is captured.
fn rename_binders(p: &Process, pool: &[&str], choice: &mut impl Iterator<Item = usize>) -> Process {
    rename_from(p, pool, choice, &mut 0)
}

fn rename_from(
    p: &Process,
    pool: &[&str],
    choice: &mut impl Iterator<Item = usize>,
    n: &mut usize,
) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefix(l, x) => Process::prefix(l.clone(), rename_from(x, pool, choice, n)),
        Process::Keyed(l, k, x) => Process::keyed(l.clone(), *k, rename_from(x, pool, choice, n)),
        Process::Sum(x, y) => {
            let x = rename_from(x, pool, choice, n);
            Process::sum(x, rename_from(y, pool, choice, n))
        }
        Process::Par(x, y) => {
            let x = rename_from(x, pool, choice, n);
            Process::par(x, rename_from(y, pool, choice, n))
        }
        Process::Restrict(a, x) => {
            let stem = pool[choice.next().unwrap_or(0) % pool.len()];
            let fresh = name(&format!("{stem}{n}"));
            *n += 1;
            let body = subst(x, a, &fresh);
            Process::restrict(fresh, rename_from(&body, pool, choice, n))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(p in arb_process()) {
        let text = pretty_print(&p);
        prop_assert_eq!(parse(&text).unwrap(), p, "{}", text);
    }

    #[test]
    fn keys_of_agrees_with_traversal(p in arb_process()) {
        let mut expected = BTreeSet::new();
        collect_keys(&p, &mut expected);
        prop_assert_eq!(keys_of(&p), expected);
    }

    #[test]
    fn keys_of_distributes_over_operators(x in arb_process(), y in arb_process(), k in 0u32..6) {
        let union: BTreeSet<Key> = keys_of(&x).union(&keys_of(&y)).copied().collect();
        prop_assert_eq!(keys_of(&Process::sum(x.clone(), y.clone())), union.clone());
        prop_assert_eq!(keys_of(&Process::par(x.clone(), y)), union);
        let mut with_k = keys_of(&x);
        with_k.insert(Key(k));
        prop_assert_eq!(keys_of(&Process::keyed(Label::Tau, Key(k), x)), with_k);
    }

    #[test]
    fn standard_iff_no_keys(p in arb_process()) {
        prop_assert_eq!(is_std(&p), !any_keyed(&p));
        prop_assert_eq!(is_std(&p), keys_of(&p).is_empty());
    }

    #[test]
    fn canonicalize_is_idempotent_and_conservative(p in arb_process()) {
        let c = canonicalize(&p);
        prop_assert_eq!(canonicalize(&c), c.clone());
        prop_assert_eq!(keys_of(&c), keys_of(&p));
        prop_assert_eq!(is_std(&c), is_std(&p));
        prop_assert_eq!(c.free_names(), p.free_names());
    }

    #[test]
    fn alpha_variants_share_a_canonical_form(
        p in arb_process(),
        picks in prop::collection::vec(0usize..4, 0..12),
    ) {
        let variant = rename_binders(&p, &["p", "q", "r", "s"], &mut picks.into_iter());
        prop_assert_eq!(canonicalize(&variant), canonicalize(&p));
    }

    #[test]
    fn renaming_a_free_name_is_visible(x in arb_process()) {
        let a = name("a");
        let p = Process::par(Process::prefix(Label::Input(a.clone()), Process::Nil), x);
        let q = subst(&p, &a, &name("p"));
        prop_assert_ne!(canonicalize(&q), canonicalize(&p));
    }
}

#[test]
fn brute_force_alpha_variants_of_a_nested_binder() {
    // every way to rename the two binders of ((a.b)\a)\b with free c alongside
    let p = parse("((a.b | c)\\a)\\b").unwrap();
    let pool = ["p", "q", "r", "s"];
    let canon = canonicalize(&p);
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            let v = rename_binders(&p, &pool, &mut [i, j].into_iter());
            assert_eq!(canonicalize(&v), canon, "{v}");
        }
    }
    assert_eq!(canon.to_string(), "(n1.n0 | c)\\n1\\n0");
}
