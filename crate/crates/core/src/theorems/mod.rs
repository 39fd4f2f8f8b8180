//! Realisation of proof labels and constructive witnesses for connected
//! labels, together with the exhaustive property suites.
//!
//! Witnesses are assembled by recursion on a ⌣ derivation, then every step
//! is re-derived with [`lts::derive`](crate::lts::derive) and checked by the
//! independent oracles before being returned.

mod report;
mod suites;

pub use report::{summary_table, Report};
pub use suites::{
    relation_table, run_suite, verify_complementarity, verify_connected_witnesses,
    verify_relation_algebra, verify_theorem1_forward, RelationTable, Suite,
};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::causality::{check_derivation, CausalDerivation, CausalRule, Relation};
use crate::lts::{check_transition, derive, Direction, Transition};
use crate::prooflabels::{branch_view, is_valid, Decorator, LabelView, ProofLabel, Side};
use crate::reach::{rewind, Path};
use crate::syntax::{is_std, keys_of, Key, Label, Process};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("`{0}` is not a valid proof label")]
    InvalidLabel(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("oracle rejected the witness: {0}")]
    Rejected(String),
}

/// A standard process and a forward step from it carrying a given label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealisationWitness {
    pub realiser: Process,
    pub step: Transition,
}

/// The standard process that performs `t` in one forward step.
pub fn realiser(t: &ProofLabel) -> Process {
    realiser_view(t.view())
}

fn realiser_view(t: LabelView<'_>) -> Process {
    match t.head() {
        Some(Decorator::SumL) => Process::sum(realiser_view(t.tail()), Process::Nil),
        Some(Decorator::SumR) => Process::sum(Process::Nil, realiser_view(t.tail())),
        Some(Decorator::ParL) => Process::par(realiser_view(t.tail()), Process::Nil),
        Some(Decorator::ParR) => Process::par(Process::Nil, realiser_view(t.tail())),
        None => match t {
            LabelView::Base { label, .. } => Process::prefix(label.clone(), Process::Nil),
            LabelView::Sync { left, right, .. } => {
                Process::par(realiser_view(left.into()), realiser_view(right.into()))
            }
        },
    }
}

pub fn realise(t: &ProofLabel) -> Result<RealisationWitness, TheoremError> {
    if !is_valid(t) {
        return Err(TheoremError::InvalidLabel(t.to_string()));
    }
    let realiser = realiser(t);
    let step = derive(&realiser, Direction::Forward, t)
        .ok_or_else(|| TheoremError::Rejected(format!("{realiser} cannot perform {t}")))?;
    let w = RealisationWitness { realiser, step };
    check_realisation(&w, t)?;
    Ok(w)
}

/// Oracle for realisation witnesses.
pub fn check_realisation(w: &RealisationWitness, t: &ProofLabel) -> Result<(), TheoremError> {
    let ok = is_std(&w.realiser)
        && w.step.source == w.realiser
        && w.step.direction == Direction::Forward
        && &w.step.label == t
        && check_transition(&w.step)
        && derive(&w.realiser, Direction::Forward, t).is_some_and(|d| d.target == w.step.target);
    if ok {
        Ok(())
    } else {
        Err(TheoremError::Rejected(format!(
            "realisation of {t} by {}",
            w.realiser
        )))
    }
}

/// Two forward transitions and a path between their sources.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnWitness {
    pub t1: Transition,
    pub t2: Transition,
    pub link: Path,
}

impl ConnWitness {
    /// The pair in the form of the original statement: `t1` and the
    /// reversal of `t2`, joined by the link followed by `t2`.
    pub fn with_backward_second(&self) -> Option<(Transition, Path)> {
        let back = crate::lts::reverse(&self.t2).ok()?;
        let mut link = self.link.clone();
        link.push(self.t2.clone()).ok()?;
        Some((back, link))
    }
}

/// Processes and link steps before anything is derived.
struct Draft {
    x1: Process,
    x2: Process,
    link: Vec<(Direction, ProofLabel)>,
}

impl Draft {
    fn same(x: Process) -> Draft {
        Draft {
            x1: x.clone(),
            x2: x,
            link: Vec::new(),
        }
    }

    fn wrap(self, d: Decorator, other: Process) -> Draft {
        let place = |x: Process| match d {
            Decorator::SumL => Process::sum(x, other.clone()),
            Decorator::SumR => Process::sum(other.clone(), x),
            Decorator::ParL => Process::par(x, other.clone()),
            Decorator::ParR => Process::par(other.clone(), x),
        };
        Draft {
            x1: place(self.x1),
            x2: place(self.x2),
            link: self
                .link
                .into_iter()
                .map(|(dir, t)| (dir, t.prepend(d)))
                .collect(),
        }
    }

    fn keys(&self) -> BTreeSet<Key> {
        let mut ks = keys_of(&self.x1);
        ks.extend(keys_of(&self.x2));
        for (_, t) in &self.link {
            ks.extend(t.keys());
        }
        ks
    }
}

fn pick_key(preferred: Key, avoid: Key, reserved: &BTreeSet<Key>) -> Key {
    if preferred != avoid && !reserved.contains(&preferred) {
        return preferred;
    }
    (0..)
        .map(Key)
        .find(|k| *k != preferred && *k != avoid && !reserved.contains(k))
        .expect("keys are unbounded")
}

fn bare(t: LabelView<'_>) -> Option<(&Label, Key)> {
    match t {
        LabelView::Base {
            path: [],
            label,
            key,
        } => Some((label, key)),
        _ => None,
    }
}

fn precondition(msg: impl Into<String>) -> TheoremError {
    TheoremError::Precondition(msg.into())
}

/// Assembles processes and the link following the rule at each node.
///
/// `reserved` holds keys that may not be used for new link steps. They are
/// needed when two drafts are put side by side under a synchronisation: a
/// step on one side must not reuse a key present on the other.
fn draft(
    d: &CausalDerivation,
    a: LabelView<'_>,
    b: LabelView<'_>,
    reserved: &BTreeSet<Key>,
) -> Result<Draft, TheoremError> {
    if d.relation != Relation::Conn {
        return Err(precondition(format!(
            "{} node inside a connectivity derivation",
            d.relation
        )));
    }
    let sub = |i: usize| {
        d.premises
            .get(i)
            .ok_or_else(|| precondition(format!("{} lacks a premise", d.rule)))
    };
    let head_tail = |t: LabelView<'_>| {
        t.head()
            .map(|_| ())
            .ok_or_else(|| precondition("missing decorator"))
    };
    match d.rule {
        CausalRule::A1 => {
            let (alpha, k) = bare(a).ok_or_else(|| precondition("A1 on a decorated label"))?;
            if a == b {
                return Ok(Draft::same(Process::prefix(alpha.clone(), Process::Nil)));
            }
            let r = realiser_view(b);
            let j = pick_key(k, b.key(), reserved);
            Ok(Draft {
                x1: Process::prefix(alpha.clone(), r.clone()),
                x2: Process::keyed(alpha.clone(), j, r),
                link: vec![(Direction::Forward, ProofLabel::bare(alpha.clone(), j))],
            })
        }
        CausalRule::A2 => {
            let (beta, n) = bare(b).ok_or_else(|| precondition("A2 on a decorated label"))?;
            let r = realiser_view(a);
            let j = pick_key(n, a.key(), reserved);
            Ok(Draft {
                x1: Process::keyed(beta.clone(), j, r.clone()),
                x2: Process::prefix(beta.clone(), r),
                link: vec![(Direction::Backward, ProofLabel::bare(beta.clone(), j))],
            })
        }
        CausalRule::C1(_) | CausalRule::P1(_) => {
            head_tail(a)?;
            let dec = a.head().expect("checked");
            let inner = draft(sub(0)?, a.tail(), b.tail(), reserved)?;
            Ok(inner.wrap(dec, Process::Nil))
        }
        CausalRule::C2(s) => {
            head_tail(a)?;
            head_tail(b)?;
            let (ra, rb) = (realiser_view(a.tail()), realiser_view(b.tail()));
            Ok(Draft::same(match s {
                Side::L => Process::sum(ra, rb),
                Side::R => Process::sum(rb, ra),
            }))
        }
        CausalRule::P2(s) => {
            head_tail(a)?;
            head_tail(b)?;
            let (ra, rb) = (realiser_view(a.tail()), realiser_view(b.tail()));
            let x1 = match s {
                Side::L => Process::par(ra, rb),
                Side::R => Process::par(rb, ra),
            };
            let (k1, k2) = (a.key(), b.key());
            if k1 != k2 && !reserved.contains(&k1) {
                // fire the first label, then the second from where it leads
                let first = a.to_owned();
                let step = derive(&x1, Direction::Forward, &first).ok_or_else(|| {
                    TheoremError::Rejected(format!("{x1} cannot perform {first}"))
                })?;
                Ok(Draft {
                    x1,
                    x2: step.target,
                    link: vec![(Direction::Forward, first)],
                })
            } else {
                Ok(Draft::same(x1))
            }
        }
        CausalRule::S1(s) => {
            let (l, r) = b
                .as_pair()
                .ok_or_else(|| precondition("S1 without a pair"))?;
            head_tail(a)?;
            let inner = draft(sub(0)?, a.tail(), branch_view(l, r, s), reserved)?;
            let other = realiser_view(branch_view(l, r, s.opposite()));
            Ok(inner.wrap(Decorator::par(s), other))
        }
        CausalRule::S2(s) => {
            let (l, r) = a
                .as_pair()
                .ok_or_else(|| precondition("S2 without a pair"))?;
            head_tail(b)?;
            let inner = draft(sub(0)?, branch_view(l, r, s), b.tail(), reserved)?;
            let other = realiser_view(branch_view(l, r, s.opposite()));
            Ok(inner.wrap(Decorator::par(s), other))
        }
        CausalRule::S3 => {
            let (al, ar) = a
                .as_pair()
                .ok_or_else(|| precondition("S3 without a pair"))?;
            let (bl, br) = b
                .as_pair()
                .ok_or_else(|| precondition("S3 without a pair"))?;
            let mut reserved = reserved.clone();
            reserved.insert(a.key());
            reserved.insert(b.key());
            let left = draft(
                sub(0)?,
                branch_view(al, ar, Side::L),
                branch_view(bl, br, Side::L),
                &reserved,
            )?;
            reserved.extend(left.keys());
            let right = draft(
                sub(1)?,
                branch_view(al, ar, Side::R),
                branch_view(bl, br, Side::R),
                &reserved,
            )?;
            let mut link: Vec<_> = left
                .link
                .into_iter()
                .map(|(dir, t)| (dir, t.prepend(Decorator::ParL)))
                .collect();
            link.extend(
                right
                    .link
                    .into_iter()
                    .map(|(dir, t)| (dir, t.prepend(Decorator::ParR))),
            );
            Ok(Draft {
                x1: Process::par(left.x1, right.x1),
                x2: Process::par(left.x2, right.x2),
                link,
            })
        }
    }
}

fn materialize(
    draft: Draft,
    t1: &ProofLabel,
    t2: &ProofLabel,
) -> Result<ConnWitness, TheoremError> {
    let fire = |x: &Process, t: &ProofLabel| {
        derive(x, Direction::Forward, t)
            .ok_or_else(|| TheoremError::Rejected(format!("{x} cannot perform {t}")))
    };
    let first = fire(&draft.x1, t1)?;
    let second = fire(&draft.x2, t2)?;
    let mut link = Path::empty(draft.x1);
    for (dir, t) in &draft.link {
        let step = derive(&link.target, *dir, t).ok_or_else(|| {
            TheoremError::Rejected(format!(
                "link step {} {t} from {}",
                dir.letter(),
                link.target
            ))
        })?;
        link.push(step).expect("step starts at the path target");
    }
    if link.target != draft.x2 {
        return Err(TheoremError::Rejected(format!(
            "link ends at {}, not {}",
            link.target, draft.x2
        )));
    }
    Ok(ConnWitness {
        t1: first,
        t2: second,
        link,
    })
}

fn not_tau(t: &ProofLabel) -> bool {
    !t.view().is_tau()
}

fn entry_checks(
    d: &CausalDerivation,
    t1: &ProofLabel,
    t2: &ProofLabel,
) -> Result<(), TheoremError> {
    for t in [t1, t2] {
        if !is_valid(t) {
            return Err(TheoremError::InvalidLabel(t.to_string()));
        }
    }
    if d.relation != Relation::Conn || !check_derivation(d, t1, t2) {
        return Err(precondition(format!("not a derivation of {t1} ⌣ {t2}")));
    }
    Ok(())
}

/// Base case: neither label is τ. The link has at most one step and one of
/// the two sources is standard.
pub fn realize_connected_base(
    d: &CausalDerivation,
    t1: &ProofLabel,
    t2: &ProofLabel,
) -> Result<ConnWitness, TheoremError> {
    entry_checks(d, t1, t2)?;
    if !not_tau(t1) || !not_tau(t2) {
        return Err(precondition("base case needs labels other than tau"));
    }
    let w = materialize(draft(d, t1.view(), t2.view(), &BTreeSet::new())?, t1, t2)?;
    check_witness(&w, t1, t2, 2)?;
    check_base_shape(&w)?;
    Ok(w)
}

/// General case: two forward transitions whose sources are joined by at
/// most two steps.
pub fn realize_connected(
    d: &CausalDerivation,
    t1: &ProofLabel,
    t2: &ProofLabel,
) -> Result<ConnWitness, TheoremError> {
    if not_tau(t1) && not_tau(t2) {
        return realize_connected_base(d, t1, t2);
    }
    entry_checks(d, t1, t2)?;
    let w = materialize(draft(d, t1.view(), t2.view(), &BTreeSet::new())?, t1, t2)?;
    check_witness(&w, t1, t2, 2)?;
    Ok(w)
}

/// Oracle for connectivity witnesses: both steps forward, labelled as
/// requested, re-checked against their derivations; the link is a valid
/// path of bounded length from the first source to the second; the first
/// source rewinds to a standard process.
pub fn check_witness(
    w: &ConnWitness,
    t1: &ProofLabel,
    t2: &ProofLabel,
    max_link: usize,
) -> Result<(), TheoremError> {
    let reject = |what: &str| Err(TheoremError::Rejected(format!("{what} for {t1} ⌣ {t2}")));
    for (t, label) in [(&w.t1, t1), (&w.t2, t2)] {
        if t.direction != Direction::Forward || &t.label != label || !check_transition(t) {
            return reject("bad transition");
        }
    }
    if w.link.source != w.t1.source || w.link.target != w.t2.source || !w.link.verify() {
        return reject("bad link");
    }
    if w.link.len() > max_link {
        return reject("link too long");
    }
    if rewind(&w.t1.source).is_none() {
        return reject("unreachable source");
    }
    Ok(())
}

fn check_base_shape(w: &ConnWitness) -> Result<(), TheoremError> {
    if w.link.len() > 1 || !(is_std(&w.t1.source) || is_std(&w.t2.source)) {
        return Err(TheoremError::Rejected(format!(
            "base-case shape violated: link of {} steps between {} and {}",
            w.link.len(),
            w.t1.source,
            w.t2.source
        )));
    }
    Ok(())
}
