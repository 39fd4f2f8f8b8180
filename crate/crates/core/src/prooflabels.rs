//! Proof keyed labels.
//!
//! A proof label is a keyed label decorated with the path through sums and
//! parallel compositions that led to the firing prefix, or a synchronisation
//! pair of two such decorated labels sharing one key. Decorator paths are
//! stored outermost first.
//!
//! Text form: decorators `+L.` `+R.` `|L.` `|R.` outermost first, then either
//! a base label `a[1]`, `~a[1]`, `tau[1]`, or a pair `<|L a[1], |R ~a[1]>`
//! whose branches may carry their own decorators (`<|L +R.a[1], |R ~a[1]>`).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Cursor, Key, Label, Name, SyntaxError, Tok};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Decorator {
    SumL,
    SumR,
    ParL,
    ParR,
}

impl Decorator {
    pub const ALL: [Decorator; 4] = [
        Decorator::SumL,
        Decorator::SumR,
        Decorator::ParL,
        Decorator::ParR,
    ];

    pub fn sum(side: Side) -> Self {
        match side {
            Side::L => Decorator::SumL,
            Side::R => Decorator::SumR,
        }
    }

    pub fn par(side: Side) -> Self {
        match side {
            Side::L => Decorator::ParL,
            Side::R => Decorator::ParR,
        }
    }

    pub fn side(self) -> Side {
        match self {
            Decorator::SumL | Decorator::ParL => Side::L,
            Decorator::SumR | Decorator::ParR => Side::R,
        }
    }

    pub fn is_par(self) -> bool {
        matches!(self, Decorator::ParL | Decorator::ParR)
    }

    pub fn opposite(self) -> Self {
        match self {
            Decorator::SumL => Decorator::SumR,
            Decorator::SumR => Decorator::SumL,
            Decorator::ParL => Decorator::ParR,
            Decorator::ParR => Decorator::ParL,
        }
    }
}

impl fmt::Display for Decorator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decorator::SumL => "+L",
            Decorator::SumR => "+R",
            Decorator::ParL => "|L",
            Decorator::ParR => "|R",
        })
    }
}

/// One side of a synchronisation pair. The leading `|L` / `|R` of the pair
/// is implicit; `path` holds only the decorators below it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Branch {
    pub path: Vec<Decorator>,
    pub label: Label,
    pub key: Key,
}

impl Branch {
    pub fn new(path: Vec<Decorator>, label: Label, key: Key) -> Self {
        Branch { path, label, key }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ProofLabel {
    Base {
        path: Vec<Decorator>,
        label: Label,
        key: Key,
    },
    Sync {
        path: Vec<Decorator>,
        left: Branch,
        right: Branch,
    },
}

impl ProofLabel {
    pub fn base(path: Vec<Decorator>, label: Label, key: Key) -> Self {
        ProofLabel::Base { path, label, key }
    }

    /// The undecorated keyed label `label[key]`.
    pub fn bare(label: Label, key: Key) -> Self {
        ProofLabel::Base {
            path: Vec::new(),
            label,
            key,
        }
    }

    pub fn sync(path: Vec<Decorator>, left: Branch, right: Branch) -> Self {
        ProofLabel::Sync { path, left, right }
    }

    pub fn path(&self) -> &[Decorator] {
        match self {
            ProofLabel::Base { path, .. } | ProofLabel::Sync { path, .. } => path,
        }
    }

    /// Adds `d` as the new outermost decorator.
    pub fn prepend(&self, d: Decorator) -> ProofLabel {
        let mut out = self.clone();
        match &mut out {
            ProofLabel::Base { path, .. } | ProofLabel::Sync { path, .. } => path.insert(0, d),
        }
        out
    }

    pub fn view(&self) -> LabelView<'_> {
        match self {
            ProofLabel::Base { path, label, key } => LabelView::Base {
                path,
                label,
                key: *key,
            },
            ProofLabel::Sync { path, left, right } => LabelView::Sync { path, left, right },
        }
    }

    /// Total number of decorators, branch decorators included.
    pub fn decorator_count(&self) -> usize {
        match self {
            ProofLabel::Base { path, .. } => path.len(),
            ProofLabel::Sync { path, left, right } => {
                path.len() + left.path.len() + right.path.len()
            }
        }
    }

    /// All keys mentioned by the label.
    pub fn keys(&self) -> BTreeSet<Key> {
        match self {
            ProofLabel::Base { key, .. } => BTreeSet::from([*key]),
            ProofLabel::Sync { left, right, .. } => BTreeSet::from([left.key, right.key]),
        }
    }
}

/// The underlying label: the base label, or `tau` for a pair.
pub fn label_of(t: &ProofLabel) -> Label {
    t.view().label()
}

/// The underlying key: the base key, or the left branch key for a pair.
pub fn key_of(t: &ProofLabel) -> Key {
    t.view().key()
}

/// Whether `t` is a proof label of the calculus: a pair must join
/// complementary non-`tau` labels under one key.
pub fn is_valid(t: &ProofLabel) -> bool {
    match t {
        ProofLabel::Base { .. } => true,
        ProofLabel::Sync { left, right, .. } => {
            !left.label.is_tau()
                && left.label.is_complement_of(&right.label)
                && left.key == right.key
        }
    }
}

/// A borrowed proof label whose outer decorators can be peeled without
/// copying.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LabelView<'a> {
    Base {
        path: &'a [Decorator],
        label: &'a Label,
        key: Key,
    },
    Sync {
        path: &'a [Decorator],
        left: &'a Branch,
        right: &'a Branch,
    },
}

impl<'a> LabelView<'a> {
    pub fn path(&self) -> &'a [Decorator] {
        match *self {
            LabelView::Base { path, .. } | LabelView::Sync { path, .. } => path,
        }
    }

    pub fn head(&self) -> Option<Decorator> {
        self.path().first().copied()
    }

    /// Drops the outermost decorator (no-op on an undecorated label).
    pub fn tail(&self) -> LabelView<'a> {
        match *self {
            LabelView::Base { path, label, key } => LabelView::Base {
                path: path.get(1..).unwrap_or(&[]),
                label,
                key,
            },
            LabelView::Sync { path, left, right } => LabelView::Sync {
                path: path.get(1..).unwrap_or(&[]),
                left,
                right,
            },
        }
    }

    /// An undecorated keyed label `α[k]`.
    pub fn is_bare(&self) -> bool {
        matches!(self, LabelView::Base { path: [], .. })
    }

    /// An undecorated pair, returning its branches.
    pub fn as_pair(&self) -> Option<(&'a Branch, &'a Branch)> {
        match *self {
            LabelView::Sync {
                path: [],
                left,
                right,
            } => Some((left, right)),
            _ => None,
        }
    }

    pub fn label(&self) -> Label {
        match self {
            LabelView::Base { label, .. } => (*label).clone(),
            LabelView::Sync { .. } => Label::Tau,
        }
    }

    pub fn is_tau(&self) -> bool {
        match self {
            LabelView::Base { label, .. } => label.is_tau(),
            LabelView::Sync { .. } => true,
        }
    }

    pub fn key(&self) -> Key {
        match self {
            LabelView::Base { key, .. } => *key,
            LabelView::Sync { left, .. } => left.key,
        }
    }

    pub fn to_owned(&self) -> ProofLabel {
        match *self {
            LabelView::Base { path, label, key } => {
                ProofLabel::base(path.to_vec(), label.clone(), key)
            }
            LabelView::Sync { path, left, right } => {
                ProofLabel::sync(path.to_vec(), left.clone(), right.clone())
            }
        }
    }
}

impl<'a> From<&'a Branch> for LabelView<'a> {
    fn from(b: &'a Branch) -> Self {
        LabelView::Base {
            path: &b.path,
            label: &b.label,
            key: b.key,
        }
    }
}

/// Branch `side` of a pair, viewed as a base label.
pub fn branch_view<'a>(left: &'a Branch, right: &'a Branch, side: Side) -> LabelView<'a> {
    match side {
        Side::L => left.into(),
        Side::R => right.into(),
    }
}

impl fmt::Display for LabelView<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.path() {
            write!(f, "{d}.")?;
        }
        match self {
            LabelView::Base { label, key, .. } => write!(f, "{label}[{key}]"),
            LabelView::Sync { left, right, .. } => {
                write!(f, "<|L ")?;
                write_branch(f, left)?;
                write!(f, ", |R ")?;
                write_branch(f, right)?;
                write!(f, ">")
            }
        }
    }
}

fn write_branch(f: &mut fmt::Formatter<'_>, b: &Branch) -> fmt::Result {
    for d in &b.path {
        write!(f, "{d}.")?;
    }
    write!(f, "{}[{}]", b.label, b.key)
}

impl fmt::Display for ProofLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.view().fmt(f)
    }
}

/// Parses the text form of a proof label.
pub fn parse_label(text: &str) -> Result<ProofLabel, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let path = parse_decorators(&mut cur)?;
    let out = if cur.eat(&Tok::LAngle) {
        expect_side(&mut cur, Tok::Bar, "L")?;
        let left = parse_branch(&mut cur)?;
        cur.expect(&Tok::Comma)?;
        expect_side(&mut cur, Tok::Bar, "R")?;
        let right = parse_branch(&mut cur)?;
        cur.expect(&Tok::RAngle)?;
        ProofLabel::sync(path, left, right)
    } else {
        let (label, key) = parse_keyed(&mut cur)?;
        ProofLabel::base(path, label, key)
    };
    cur.finish()?;
    Ok(out)
}

fn parse_decorators(cur: &mut Cursor) -> Result<Vec<Decorator>, SyntaxError> {
    let mut path = Vec::new();
    loop {
        let sum = match cur.peek() {
            Some(Tok::Plus) => true,
            Some(Tok::Bar) => false,
            _ => return Ok(path),
        };
        let side = match cur.peek_at(1) {
            Some(Tok::Ident(s)) if s == "L" => Side::L,
            Some(Tok::Ident(s)) if s == "R" => Side::R,
            _ => {
                cur.bump();
                return Err(cur.unexpected("expected `L` or `R`"));
            }
        };
        cur.bump();
        cur.bump();
        cur.expect(&Tok::Dot)?;
        path.push(if sum {
            Decorator::sum(side)
        } else {
            Decorator::par(side)
        });
    }
}

fn expect_side(cur: &mut Cursor, bar: Tok, side: &str) -> Result<(), SyntaxError> {
    cur.expect(&bar)?;
    match cur.peek() {
        Some(Tok::Ident(s)) if s == side => {
            cur.bump();
            Ok(())
        }
        _ => Err(cur.unexpected(&format!("expected `{side}`"))),
    }
}

fn parse_branch(cur: &mut Cursor) -> Result<Branch, SyntaxError> {
    let path = parse_decorators(cur)?;
    let at = cur.offset();
    let (label, key) = parse_keyed(cur)?;
    if label.is_tau() {
        return Err(SyntaxError::at(
            at,
            "a synchronisation branch cannot carry `tau`",
        ));
    }
    Ok(Branch::new(path, label, key))
}

fn parse_keyed(cur: &mut Cursor) -> Result<(Label, Key), SyntaxError> {
    if !cur.at_action() {
        return Err(cur.unexpected("expected a label"));
    }
    let label = cur.action()?;
    let key = cur.key()?;
    Ok((label, key))
}

impl std::str::FromStr for ProofLabel {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

impl Serialize for ProofLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProofLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_label(&text).map_err(serde::de::Error::custom)
    }
}

/// All decorator strings of exactly `len` symbols, in lexicographic order.
pub fn decorator_paths(len: usize) -> Vec<Vec<Decorator>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                Decorator::ALL.iter().map(move |d| {
                    let mut q = p.clone();
                    q.push(*d);
                    q
                })
            })
            .collect();
    }
    out
}

/// Every valid proof label over `names` (and their complements, and `tau`)
/// and `keys` whose total decorator count is at most `max_decorators`.
///
/// Labels are grouped by decorator count; within a group base labels come
/// before pairs.
pub fn enumerate_valid(names: &[Name], keys: &[Key], max_decorators: usize) -> Vec<ProofLabel> {
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let mut keys = keys.to_vec();
    keys.sort();
    keys.dedup();

    let mut labels: Vec<Label> = Vec::new();
    for a in &names {
        labels.push(Label::Input(a.clone()));
        labels.push(Label::Output(a.clone()));
    }
    let actions = labels.clone();
    labels.push(Label::Tau);

    let paths: Vec<Vec<Vec<Decorator>>> = (0..=max_decorators).map(decorator_paths).collect();
    let mut out = Vec::new();
    for total in 0..=max_decorators {
        for path in &paths[total] {
            for label in &labels {
                for key in &keys {
                    out.push(ProofLabel::base(path.clone(), label.clone(), *key));
                }
            }
        }
        for outer in 0..=total {
            for inner_left in 0..=total - outer {
                let inner_right = total - outer - inner_left;
                for path in &paths[outer] {
                    for lp in &paths[inner_left] {
                        for rp in &paths[inner_right] {
                            for action in &actions {
                                let co = action.complement().expect("non-tau action");
                                for key in &keys {
                                    out.push(ProofLabel::sync(
                                        path.clone(),
                                        Branch::new(lp.clone(), action.clone(), *key),
                                        Branch::new(rp.clone(), co.clone(), *key),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
