//! Connectivity (⌣), dependence (⊗) and independence (ι) of proof labels.
//!
//! The deciders peel one outer decorator, or enter one synchronisation
//! branch, per rule, so they terminate on every label. When several rules
//! fit, they are tried in the order A1, A2, C1, C2, P1, P2, S1, S2, S3 and
//! the first success is returned.

use std::fmt;

use serde::Serialize;

use crate::prooflabels::{branch_view, Decorator, LabelView, ProofLabel, Side};
use crate::syntax::Key;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Conn,
    Dep,
    Indep,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Conn, Relation::Dep, Relation::Indep];

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Conn => "⌣",
            Relation::Dep => "⊗",
            Relation::Indep => "ι",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Conn => "conn",
            Relation::Dep => "dep",
            Relation::Indep => "indep",
        })
    }
}

impl std::str::FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conn" => Ok(Relation::Conn),
            "dep" => Ok(Relation::Dep),
            "indep" => Ok(Relation::Indep),
            other => Err(format!(
                "unknown relation `{other}` (expected conn, dep or indep)"
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CausalRule {
    A1,
    A2,
    C1(Side),
    C2(Side),
    P1(Side),
    P2(Side),
    S1(Side),
    S2(Side),
    S3,
}

impl fmt::Display for CausalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CausalRule::A1 => f.write_str("A1"),
            CausalRule::A2 => f.write_str("A2"),
            CausalRule::C1(d) => write!(f, "C1_{d}"),
            CausalRule::C2(d) => write!(f, "C2_{d}"),
            CausalRule::P1(d) => write!(f, "P1_{d}"),
            CausalRule::P2(d) => write!(f, "P2_{d}"),
            CausalRule::S1(d) => write!(f, "S1_{d}"),
            CausalRule::S2(d) => write!(f, "S2_{d}"),
            CausalRule::S3 => f.write_str("S3"),
        }
    }
}

/// Key evidence carried by P2 nodes of ⊗ and ι.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum KeyFact {
    Equal(Key),
    Differ(Key, Key),
}

impl fmt::Display for KeyFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyFact::Equal(k) => write!(f, "{k} = {k}"),
            KeyFact::Differ(k1, k2) => write!(f, "{k1} != {k2}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CausalDerivation {
    pub relation: Relation,
    pub rule: CausalRule,
    pub premises: Vec<CausalDerivation>,
    pub side: Option<KeyFact>,
}

impl CausalDerivation {
    fn axiom(relation: Relation, rule: CausalRule) -> Self {
        CausalDerivation {
            relation,
            rule,
            premises: Vec::new(),
            side: None,
        }
    }

    fn unary(relation: Relation, rule: CausalRule, premise: CausalDerivation) -> Self {
        CausalDerivation {
            relation,
            rule,
            premises: vec![premise],
            side: None,
        }
    }

    pub fn size(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(CausalDerivation::size)
            .sum::<usize>()
    }
}

pub fn check_conn(t1: &ProofLabel, t2: &ProofLabel) -> Option<CausalDerivation> {
    decide(Relation::Conn, t1.view(), t2.view())
}

pub fn check_dep(t1: &ProofLabel, t2: &ProofLabel) -> Option<CausalDerivation> {
    decide(Relation::Dep, t1.view(), t2.view())
}

pub fn check_indep(t1: &ProofLabel, t2: &ProofLabel) -> Option<CausalDerivation> {
    decide(Relation::Indep, t1.view(), t2.view())
}

pub fn check(rel: Relation, t1: &ProofLabel, t2: &ProofLabel) -> Option<CausalDerivation> {
    decide(rel, t1.view(), t2.view())
}

/// The same decision as [`check`], without building a derivation.
pub fn holds(rel: Relation, t1: &ProofLabel, t2: &ProofLabel) -> bool {
    holds_view(rel, t1.view(), t2.view())
}

/// The shape a pair of labels presents to the rules, in trial order.
enum Shape<'a> {
    A1,
    A2,
    Choice {
        same: bool,
        side: Side,
        tails: (LabelView<'a>, LabelView<'a>),
    },
    Parallel {
        same: bool,
        side: Side,
        tails: (LabelView<'a>, LabelView<'a>),
    },
    /// `|_d θ` against a pair: S1 when the pair is on the right.
    SyncRight {
        side: Side,
        inner: (LabelView<'a>, LabelView<'a>),
    },
    SyncLeft {
        side: Side,
        inner: (LabelView<'a>, LabelView<'a>),
    },
    Pairs {
        left: (LabelView<'a>, LabelView<'a>),
        right: (LabelView<'a>, LabelView<'a>),
    },
    None,
}

fn shape<'a>(rel: Relation, a: LabelView<'a>, b: LabelView<'a>) -> Shape<'a> {
    if rel != Relation::Indep {
        if a.is_bare() {
            return Shape::A1;
        }
        if b.is_bare() {
            return Shape::A2;
        }
    }
    match (a.head(), b.head(), a.as_pair(), b.as_pair()) {
        (Some(da), Some(db), _, _) if !da.is_par() && !db.is_par() => Shape::Choice {
            same: da == db,
            side: da.side(),
            tails: (a.tail(), b.tail()),
        },
        (Some(da), Some(db), _, _) if da.is_par() && db.is_par() => Shape::Parallel {
            same: da == db,
            side: da.side(),
            tails: (a.tail(), b.tail()),
        },
        (Some(da), None, _, Some((l, r))) if da.is_par() => {
            let side = da.side();
            Shape::SyncRight {
                side,
                inner: (a.tail(), branch_view(l, r, side)),
            }
        }
        (None, Some(db), Some((l, r)), _) if db.is_par() => {
            let side = db.side();
            Shape::SyncLeft {
                side,
                inner: (branch_view(l, r, side), b.tail()),
            }
        }
        (None, None, Some((al, ar)), Some((bl, br))) => Shape::Pairs {
            left: (branch_view(al, ar, Side::L), branch_view(bl, br, Side::L)),
            right: (branch_view(al, ar, Side::R), branch_view(bl, br, Side::R)),
        },
        _ => Shape::None,
    }
}

fn decide(rel: Relation, a: LabelView<'_>, b: LabelView<'_>) -> Option<CausalDerivation> {
    match shape(rel, a, b) {
        Shape::A1 => Some(CausalDerivation::axiom(rel, CausalRule::A1)),
        Shape::A2 => Some(CausalDerivation::axiom(rel, CausalRule::A2)),
        Shape::Choice {
            same: true,
            side,
            tails: (x, y),
        } => decide(rel, x, y).map(|p| CausalDerivation::unary(rel, CausalRule::C1(side), p)),
        Shape::Choice {
            same: false, side, ..
        } => (rel != Relation::Indep).then(|| CausalDerivation::axiom(rel, CausalRule::C2(side))),
        Shape::Parallel {
            same: true,
            side,
            tails: (x, y),
        } => decide(rel, x, y).map(|p| CausalDerivation::unary(rel, CausalRule::P1(side), p)),
        Shape::Parallel {
            same: false,
            side,
            tails: (x, y),
        } => {
            let (k1, k2) = (x.key(), y.key());
            let side_fact = match rel {
                Relation::Conn => None,
                Relation::Dep if k1 == k2 => Some(KeyFact::Equal(k1)),
                Relation::Indep if k1 != k2 => Some(KeyFact::Differ(k1, k2)),
                _ => return None,
            };
            Some(CausalDerivation {
                relation: rel,
                rule: CausalRule::P2(side),
                premises: Vec::new(),
                side: side_fact,
            })
        }
        Shape::SyncRight {
            side,
            inner: (x, y),
        } => decide(rel, x, y).map(|p| CausalDerivation::unary(rel, CausalRule::S1(side), p)),
        Shape::SyncLeft {
            side,
            inner: (x, y),
        } => decide(rel, x, y).map(|p| CausalDerivation::unary(rel, CausalRule::S2(side), p)),
        Shape::Pairs { left, right } => {
            let premises = match rel {
                Relation::Conn | Relation::Indep => {
                    vec![decide(rel, left.0, left.1)?, decide(rel, right.0, right.1)?]
                }
                Relation::Dep => {
                    let first = decide(Relation::Dep, left.0, left.1)
                        .and_then(|l| Some(vec![l, decide(Relation::Conn, right.0, right.1)?]));
                    match first {
                        Some(ps) => ps,
                        None => vec![
                            decide(Relation::Conn, left.0, left.1)?,
                            decide(Relation::Dep, right.0, right.1)?,
                        ],
                    }
                }
            };
            Some(CausalDerivation {
                relation: rel,
                rule: CausalRule::S3,
                premises,
                side: None,
            })
        }
        Shape::None => None,
    }
}

fn holds_view(rel: Relation, a: LabelView<'_>, b: LabelView<'_>) -> bool {
    match shape(rel, a, b) {
        Shape::A1 | Shape::A2 => true,
        Shape::Choice {
            same: true,
            tails: (x, y),
            ..
        }
        | Shape::Parallel {
            same: true,
            tails: (x, y),
            ..
        } => holds_view(rel, x, y),
        Shape::Choice { same: false, .. } => rel != Relation::Indep,
        Shape::Parallel {
            same: false,
            tails: (x, y),
            ..
        } => match rel {
            Relation::Conn => true,
            Relation::Dep => x.key() == y.key(),
            Relation::Indep => x.key() != y.key(),
        },
        Shape::SyncRight { inner: (x, y), .. } | Shape::SyncLeft { inner: (x, y), .. } => {
            holds_view(rel, x, y)
        }
        Shape::Pairs { left, right } => match rel {
            Relation::Conn | Relation::Indep => {
                holds_view(rel, left.0, left.1) && holds_view(rel, right.0, right.1)
            }
            Relation::Dep => {
                (holds_view(Relation::Dep, left.0, left.1)
                    && holds_view(Relation::Conn, right.0, right.1))
                    || (holds_view(Relation::Conn, left.0, left.1)
                        && holds_view(Relation::Dep, right.0, right.1))
            }
        },
        Shape::None => false,
    }
}

/// Checks that `d` is a derivation of `t1 rel t2` for its own relation.
/// No search: each node must match its rule exactly.
pub fn check_derivation(d: &CausalDerivation, t1: &ProofLabel, t2: &ProofLabel) -> bool {
    check_node(d, t1.view(), t2.view())
}

fn check_node(d: &CausalDerivation, a: LabelView<'_>, b: LabelView<'_>) -> bool {
    let rel = d.relation;
    let premises = d.premises.as_slice();
    let no_side = d.side.is_none();
    match d.rule {
        CausalRule::A1 | CausalRule::A2 => {
            let bare = if d.rule == CausalRule::A1 {
                a.is_bare()
            } else {
                b.is_bare()
            };
            rel != Relation::Indep && bare && premises.is_empty() && no_side
        }
        CausalRule::C1(s) | CausalRule::P1(s) => {
            let dec = if matches!(d.rule, CausalRule::C1(_)) {
                Decorator::sum(s)
            } else {
                Decorator::par(s)
            };
            let [p] = premises else { return false };
            no_side
                && a.head() == Some(dec)
                && b.head() == Some(dec)
                && p.relation == rel
                && check_node(p, a.tail(), b.tail())
        }
        CausalRule::C2(s) => {
            rel != Relation::Indep
                && premises.is_empty()
                && no_side
                && a.head() == Some(Decorator::sum(s))
                && b.head() == Some(Decorator::sum(s.opposite()))
        }
        CausalRule::P2(s) => {
            if !premises.is_empty()
                || a.head() != Some(Decorator::par(s))
                || b.head() != Some(Decorator::par(s.opposite()))
            {
                return false;
            }
            let (k1, k2) = (a.key(), b.key());
            match rel {
                Relation::Conn => no_side,
                Relation::Dep => k1 == k2 && d.side == Some(KeyFact::Equal(k1)),
                Relation::Indep => k1 != k2 && d.side == Some(KeyFact::Differ(k1, k2)),
            }
        }
        CausalRule::S1(s) => {
            let ([p], Some((l, r))) = (premises, b.as_pair()) else {
                return false;
            };
            no_side
                && a.head() == Some(Decorator::par(s))
                && p.relation == rel
                && check_node(p, a.tail(), branch_view(l, r, s))
        }
        CausalRule::S2(s) => {
            let ([p], Some((l, r))) = (premises, a.as_pair()) else {
                return false;
            };
            no_side
                && b.head() == Some(Decorator::par(s))
                && p.relation == rel
                && check_node(p, branch_view(l, r, s), b.tail())
        }
        CausalRule::S3 => {
            let ([pl, pr], Some((al, ar)), Some((bl, br))) = (premises, a.as_pair(), b.as_pair())
            else {
                return false;
            };
            let relations_fit = match rel {
                Relation::Conn | Relation::Indep => pl.relation == rel && pr.relation == rel,
                Relation::Dep => matches!(
                    (pl.relation, pr.relation),
                    (Relation::Dep, Relation::Conn) | (Relation::Conn, Relation::Dep)
                ),
            };
            no_side
                && relations_fit
                && check_node(
                    pl,
                    branch_view(al, ar, Side::L),
                    branch_view(bl, br, Side::L),
                )
                && check_node(
                    pr,
                    branch_view(al, ar, Side::R),
                    branch_view(bl, br, Side::R),
                )
        }
    }
}

/// Indented rule tree, one judgement per line.
pub fn render(d: &CausalDerivation, t1: &ProofLabel, t2: &ProofLabel) -> String {
    let mut out = String::new();
    render_node(d, t1.view(), t2.view(), 0, &mut out);
    out
}

fn render_node(
    d: &CausalDerivation,
    a: LabelView<'_>,
    b: LabelView<'_>,
    indent: usize,
    out: &mut String,
) {
    out.push_str(&"  ".repeat(indent));
    out.push_str(&format!(
        "{}  {} {} {}",
        d.rule,
        a.to_owned(),
        d.relation.symbol(),
        b.to_owned()
    ));
    if let Some(fact) = d.side {
        out.push_str(&format!("  [{fact}]"));
    }
    out.push('\n');
    let subs: Vec<(LabelView<'_>, LabelView<'_>)> = match d.rule {
        CausalRule::C1(_) | CausalRule::P1(_) => vec![(a.tail(), b.tail())],
        CausalRule::S1(s) => match b.as_pair() {
            Some((l, r)) => vec![(a.tail(), branch_view(l, r, s))],
            None => Vec::new(),
        },
        CausalRule::S2(s) => match a.as_pair() {
            Some((l, r)) => vec![(branch_view(l, r, s), b.tail())],
            None => Vec::new(),
        },
        CausalRule::S3 => match (a.as_pair(), b.as_pair()) {
            (Some((al, ar)), Some((bl, br))) => vec![
                (branch_view(al, ar, Side::L), branch_view(bl, br, Side::L)),
                (branch_view(al, ar, Side::R), branch_view(bl, br, Side::R)),
            ],
            _ => Vec::new(),
        },
        _ => Vec::new(),
    };
    for (p, (x, y)) in d.premises.iter().zip(subs) {
        render_node(p, x, y, indent + 1, out);
    }
}
