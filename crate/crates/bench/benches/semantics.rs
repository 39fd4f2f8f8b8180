use std::hint::black_box;

use ccskp::causality::{check, holds};
use ccskp::lts::{combined_steps, forward_steps};
use ccskp::prooflabels::enumerate_valid;
use ccskp::reach::build_graph;
use ccskp::syntax::{canonicalize, parse};
use ccskp::theorems::{realise, realize_connected};
use ccskp::{FreshKeyPolicy, Key, Name, Relation};
use criterion::{criterion_group, criterion_main, Criterion};

fn steps(c: &mut Criterion) {
    let p = parse("(a.b + tau) | ~b.~a | (a | ~a)\\a").unwrap();
    c.bench_function("forward steps", |b| {
        b.iter(|| forward_steps(black_box(&p), FreshKeyPolicy::LeastAbsent))
    });
    let q = parse("a[0].b[1] | ~b[1].~a | a[2]").unwrap();
    c.bench_function("combined steps", |b| {
        b.iter(|| combined_steps(black_box(&q)))
    });
    c.bench_function("canonicalize", |b| b.iter(|| canonicalize(black_box(&p))));
}

fn graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph");
    for text in ["m | l", "a.b | ~b.a | tau", "(a | ~a | b.~b)\\a"] {
        let p = parse(text).unwrap();
        group.bench_function(text, |b| b.iter(|| build_graph(black_box(&p)).unwrap()));
    }
    group.finish();
}

fn causality(c: &mut Criterion) {
    let labels = enumerate_valid(&[Name::new("a").unwrap()], &[Key(1), Key(2)], 2);
    c.bench_function("decide all pairs, depth 2", |b| {
        b.iter(|| {
            let mut n = 0usize;
            for x in &labels {
                for y in &labels {
                    n += holds(Relation::Conn, x, y) as usize;
                }
            }
            n
        })
    });
    c.bench_function("derive all pairs, depth 2", |b| {
        b.iter(|| {
            labels
                .iter()
                .flat_map(|x| labels.iter().map(move |y| (x, y)))
                .filter_map(|(x, y)| check(Relation::Conn, x, y))
                .count()
        })
    });
}

fn realisation(c: &mut Criterion) {
    let labels = enumerate_valid(&[Name::new("a").unwrap()], &[Key(1), Key(2)], 1);
    c.bench_function("realise, depth 1", |b| {
        b.iter(|| labels.iter().filter(|t| realise(t).is_ok()).count())
    });
    let pairs: Vec<_> = labels
        .iter()
        .flat_map(|x| labels.iter().map(move |y| (x, y)))
        .filter_map(|(x, y)| check(Relation::Conn, x, y).map(|d| (d, x, y)))
        .collect();
    c.bench_function("connected witnesses, depth 1", |b| {
        b.iter(|| {
            pairs
                .iter()
                .filter(|(d, x, y)| realize_connected(d, x, y).is_ok())
                .count()
        })
    });
}

criterion_group!(benches, steps, graphs, causality, realisation);
criterion_main!(benches);
