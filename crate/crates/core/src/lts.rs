//! Forward and backward proved transitions.
//!
//! Rules (right-hand variants of `+` and `|` are symmetric):
//!
//! ```text
//! pref    α.X  -α[k]->  α[k].X                       if std(X)
//! kpref   α[k].X  -θ->  α[k].X'    from X -θ-> X'     if κ(θ) ≠ k
//! +L      X + Y  -+L θ->  X' + Y   from X -θ-> X'     if std(Y)
//! |L      X | Y  -|L θ->  X' | Y   from X -θ-> X'     if κ(θ) ∉ keys(Y)
//! syn     X | Y  -<v λ[k], v' ~λ[k]>->  X' | Y'       from X -v λ[k]-> X', Y -v' ~λ[k]-> Y'
//! nu      X\a  -θ->  X'\a          from X -θ-> X'     if ℓ(θ) ∉ {a, ~a}
//! ```
//!
//! Backward rules are the same schemes read from target to source.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prooflabels::{branch_view, Branch, Decorator, LabelView, ProofLabel, Side};
use crate::syntax::{
    has_key, is_std, keys_of, least_key_not_in, Key, Label, Name, Process, SyntaxError,
};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "F")]
    Forward,
    #[serde(rename = "B")]
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Forward => 'F',
            Direction::Backward => 'B',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Rule {
    Pref,
    KPref,
    Sum(Side),
    Par(Side),
    Syn,
    Nu,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Pref => f.write_str("pref"),
            Rule::KPref => f.write_str("kpref"),
            Rule::Sum(s) => write!(f, "+{s}"),
            Rule::Par(s) => write!(f, "|{s}"),
            Rule::Syn => f.write_str("syn"),
            Rule::Nu => f.write_str("nu"),
        }
    }
}

/// Evidence for the side condition of a rule instance.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SideCondition {
    /// The continuation (pref) or the idle summand (+) is standard.
    Standard,
    /// κ(θ) differs from the key of the enclosing keyed prefix.
    KeyDiffers { key: Key, prefix_key: Key },
    /// κ(θ) does not occur in the idle parallel component.
    KeyAbsent(Key),
    /// ℓ(θ) is neither the restricted name nor its complement.
    Unrestricted { label: Label, name: Name },
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideCondition::Standard => f.write_str("std"),
            SideCondition::KeyDiffers { key, prefix_key } => write!(f, "{key} != {prefix_key}"),
            SideCondition::KeyAbsent(k) => write!(f, "{k} not in keys"),
            SideCondition::Unrestricted { label, name } => {
                write!(f, "{label} not in {{{name}, ~{name}}}")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DerivationTree {
    pub rule: Rule,
    pub direction: Direction,
    pub side: Option<SideCondition>,
    pub premises: Vec<DerivationTree>,
}

impl DerivationTree {
    fn leaf(rule: Rule, direction: Direction, side: SideCondition) -> Self {
        DerivationTree {
            rule,
            direction,
            side: Some(side),
            premises: Vec::new(),
        }
    }

    fn unary(
        rule: Rule,
        direction: Direction,
        side: SideCondition,
        premise: DerivationTree,
    ) -> Self {
        DerivationTree {
            rule,
            direction,
            side: Some(side),
            premises: vec![premise],
        }
    }

    /// The same tree read in the other direction.
    pub fn flipped(&self) -> DerivationTree {
        DerivationTree {
            rule: self.rule,
            direction: self.direction.flip(),
            side: self.side.clone(),
            premises: self.premises.iter().map(DerivationTree::flipped).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(DerivationTree::depth)
            .max()
            .unwrap_or(0)
    }

    /// One rule per line, premises indented.
    pub fn render(&self) -> String {
        fn go(t: &DerivationTree, indent: usize, out: &mut String) {
            out.push_str(&"  ".repeat(indent));
            out.push_str(&t.rule.to_string());
            if t.direction == Direction::Backward {
                out.push_str(" (rev)");
            }
            if let Some(side) = &t.side {
                out.push_str(&format!("  [{side}]"));
            }
            out.push('\n');
            for p in &t.premises {
                go(p, indent + 1, out);
            }
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }
}

/// A derivable proved step together with its derivation.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Transition {
    pub source: Process,
    pub direction: Direction,
    pub label: ProofLabel,
    pub target: Process,
    pub derivation: DerivationTree,
}

impl Transition {
    pub fn record(&self) -> TransitionRecord {
        TransitionRecord {
            source: self.source.clone(),
            dir: self.direction,
            label: self.label.clone(),
            target: self.target.clone(),
        }
    }
}

/// `<source> --F <label>--> <target>`
impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} --{} {}--> {}",
            self.source,
            self.direction.letter(),
            self.label,
            self.target
        )
    }
}

/// Structured form of a transition, without its derivation.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub source: Process,
    pub dir: Direction,
    pub label: ProofLabel,
    pub target: Process,
}

impl TransitionRecord {
    /// Re-derives the step; fails when it is not a transition.
    pub fn resolve(&self) -> Result<Transition, LtsError> {
        let t =
            derive(&self.source, self.dir, &self.label).ok_or_else(|| LtsError::NotDerivable {
                process: self.source.to_string(),
                dir: self.dir,
                label: self.label.to_string(),
            })?;
        if t.target != self.target {
            return Err(LtsError::TargetMismatch {
                expected: self.target.to_string(),
                found: t.target.to_string(),
            });
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("no {dir} transition labelled {label} from {process}")]
    NotDerivable {
        process: String,
        dir: Direction,
        label: String,
    },
    #[error("transition reaches {found}, not {expected}")]
    TargetMismatch { expected: String, found: String },
    #[error("reversal of `{0}` is not derivable (loop lemma violated)")]
    LoopLemma(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// How `pref` picks the key of a new forward step.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum FreshKeyPolicy {
    /// The least key not occurring in the process being stepped.
    #[default]
    LeastAbsent,
    /// Always this key; steps whose side conditions reject it are dropped.
    Exact(Key),
}

struct Step {
    label: ProofLabel,
    target: Process,
    tree: DerivationTree,
}

/// All forward transitions of `p`, new keys chosen by `fresh`.
pub fn forward_steps(p: &Process, fresh: FreshKeyPolicy) -> Vec<Transition> {
    let key = match fresh {
        FreshKeyPolicy::LeastAbsent => least_key_not_in(&keys_of(p)),
        FreshKeyPolicy::Exact(k) => k,
    };
    package(p, Direction::Forward, steps(p, Direction::Forward, key))
}

/// All backward transitions of `p`.
pub fn backward_steps(p: &Process) -> Vec<Transition> {
    // the key argument is only read by forward pref
    package(
        p,
        Direction::Backward,
        steps(p, Direction::Backward, Key(0)),
    )
}

/// Forward (least fresh key) followed by backward transitions.
pub fn combined_steps(p: &Process) -> Vec<Transition> {
    let mut out = forward_steps(p, FreshKeyPolicy::LeastAbsent);
    out.extend(backward_steps(p));
    out
}

fn package(p: &Process, direction: Direction, steps: Vec<Step>) -> Vec<Transition> {
    steps
        .into_iter()
        .map(|s| Transition {
            source: p.clone(),
            direction,
            label: s.label,
            target: s.target,
            derivation: s.tree,
        })
        .collect()
}

fn steps(p: &Process, dir: Direction, fresh: Key) -> Vec<Step> {
    match p {
        Process::Nil => Vec::new(),
        Process::Prefix(alpha, x) => match dir {
            Direction::Forward if is_std(x) => vec![Step {
                label: ProofLabel::bare(alpha.clone(), fresh),
                target: Process::Keyed(alpha.clone(), fresh, x.clone()),
                tree: DerivationTree::leaf(Rule::Pref, dir, SideCondition::Standard),
            }],
            _ => Vec::new(),
        },
        Process::Keyed(alpha, k, x) => {
            let mut out = Vec::new();
            if dir == Direction::Backward && is_std(x) {
                out.push(Step {
                    label: ProofLabel::bare(alpha.clone(), *k),
                    target: Process::Prefix(alpha.clone(), x.clone()),
                    tree: DerivationTree::leaf(Rule::Pref, dir, SideCondition::Standard),
                });
            }
            for s in steps(x, dir, fresh) {
                let key = s.label.view().key();
                if key != *k {
                    out.push(Step {
                        target: Process::keyed(alpha.clone(), *k, s.target),
                        tree: DerivationTree::unary(
                            Rule::KPref,
                            dir,
                            SideCondition::KeyDiffers {
                                key,
                                prefix_key: *k,
                            },
                            s.tree,
                        ),
                        label: s.label,
                    });
                }
            }
            out
        }
        Process::Sum(x, y) => {
            let mut out = Vec::new();
            if is_std(y) {
                for s in steps(x, dir, fresh) {
                    out.push(Step {
                        label: s.label.prepend(Decorator::SumL),
                        target: Process::Sum(Arc::new(s.target), y.clone()),
                        tree: DerivationTree::unary(
                            Rule::Sum(Side::L),
                            dir,
                            SideCondition::Standard,
                            s.tree,
                        ),
                    });
                }
            }
            if is_std(x) {
                for s in steps(y, dir, fresh) {
                    out.push(Step {
                        label: s.label.prepend(Decorator::SumR),
                        target: Process::Sum(x.clone(), Arc::new(s.target)),
                        tree: DerivationTree::unary(
                            Rule::Sum(Side::R),
                            dir,
                            SideCondition::Standard,
                            s.tree,
                        ),
                    });
                }
            }
            out
        }
        Process::Par(x, y) => {
            let left = steps(x, dir, fresh);
            let right = steps(y, dir, fresh);
            let mut out = Vec::new();
            for s in &left {
                let key = s.label.view().key();
                if !has_key(y, key) {
                    out.push(Step {
                        label: s.label.prepend(Decorator::ParL),
                        target: Process::Par(Arc::new(s.target.clone()), y.clone()),
                        tree: DerivationTree::unary(
                            Rule::Par(Side::L),
                            dir,
                            SideCondition::KeyAbsent(key),
                            s.tree.clone(),
                        ),
                    });
                }
            }
            for s in &right {
                let key = s.label.view().key();
                if !has_key(x, key) {
                    out.push(Step {
                        label: s.label.prepend(Decorator::ParR),
                        target: Process::Par(x.clone(), Arc::new(s.target.clone())),
                        tree: DerivationTree::unary(
                            Rule::Par(Side::R),
                            dir,
                            SideCondition::KeyAbsent(key),
                            s.tree.clone(),
                        ),
                    });
                }
            }
            for l in &left {
                let ProofLabel::Base {
                    path: lp,
                    label: ll,
                    key: lk,
                } = &l.label
                else {
                    continue;
                };
                if ll.is_tau() {
                    continue;
                }
                for r in &right {
                    let ProofLabel::Base {
                        path: rp,
                        label: rl,
                        key: rk,
                    } = &r.label
                    else {
                        continue;
                    };
                    if lk == rk && ll.is_complement_of(rl) {
                        out.push(Step {
                            label: ProofLabel::sync(
                                Vec::new(),
                                Branch::new(lp.clone(), ll.clone(), *lk),
                                Branch::new(rp.clone(), rl.clone(), *rk),
                            ),
                            target: Process::par(l.target.clone(), r.target.clone()),
                            tree: DerivationTree {
                                rule: Rule::Syn,
                                direction: dir,
                                side: None,
                                premises: vec![l.tree.clone(), r.tree.clone()],
                            },
                        });
                    }
                }
            }
            out
        }
        Process::Restrict(a, x) => steps(x, dir, fresh)
            .into_iter()
            .filter_map(|s| {
                let label = s.label.view().label();
                if label.name() == Some(a) {
                    return None;
                }
                Some(Step {
                    target: Process::restrict(a.clone(), s.target),
                    tree: DerivationTree::unary(
                        Rule::Nu,
                        dir,
                        SideCondition::Unrestricted {
                            label,
                            name: a.clone(),
                        },
                        s.tree,
                    ),
                    label: s.label,
                })
            })
            .collect(),
    }
}

/// The `dir` transition of `p` labelled exactly `label`, if one is derivable.
///
/// The key of a forward `pref` is taken from the label; only the rules' own
/// side conditions constrain it.
pub fn derive(p: &Process, dir: Direction, label: &ProofLabel) -> Option<Transition> {
    let (target, derivation) = derive_view(p, dir, label.view())?;
    Some(Transition {
        source: p.clone(),
        direction: dir,
        label: label.clone(),
        target,
        derivation,
    })
}

fn derive_view(p: &Process, dir: Direction, t: LabelView<'_>) -> Option<(Process, DerivationTree)> {
    match p {
        Process::Nil => None,
        Process::Prefix(alpha, x) => match (dir, t) {
            (
                Direction::Forward,
                LabelView::Base {
                    path: [],
                    label,
                    key,
                },
            ) if label == alpha && is_std(x) => Some((
                Process::Keyed(alpha.clone(), key, x.clone()),
                DerivationTree::leaf(Rule::Pref, dir, SideCondition::Standard),
            )),
            _ => None,
        },
        Process::Keyed(alpha, k, x) => {
            if dir == Direction::Backward {
                if let LabelView::Base {
                    path: [],
                    label,
                    key,
                } = t
                {
                    if label == alpha && key == *k {
                        return is_std(x).then(|| {
                            (
                                Process::Prefix(alpha.clone(), x.clone()),
                                DerivationTree::leaf(Rule::Pref, dir, SideCondition::Standard),
                            )
                        });
                    }
                }
            }
            let key = t.key();
            if key == *k {
                return None;
            }
            let (x2, sub) = derive_view(x, dir, t)?;
            Some((
                Process::keyed(alpha.clone(), *k, x2),
                DerivationTree::unary(
                    Rule::KPref,
                    dir,
                    SideCondition::KeyDiffers {
                        key,
                        prefix_key: *k,
                    },
                    sub,
                ),
            ))
        }
        Process::Sum(x, y) => {
            let side = match t.head()? {
                Decorator::SumL => Side::L,
                Decorator::SumR => Side::R,
                _ => return None,
            };
            let (moving, idle) = match side {
                Side::L => (x, y),
                Side::R => (y, x),
            };
            if !is_std(idle) {
                return None;
            }
            let (m2, sub) = derive_view(moving, dir, t.tail())?;
            let target = match side {
                Side::L => Process::Sum(Arc::new(m2), y.clone()),
                Side::R => Process::Sum(x.clone(), Arc::new(m2)),
            };
            Some((
                target,
                DerivationTree::unary(Rule::Sum(side), dir, SideCondition::Standard, sub),
            ))
        }
        Process::Par(x, y) => {
            if let Some((left, right)) = t.as_pair() {
                if left.label.is_tau()
                    || !left.label.is_complement_of(&right.label)
                    || left.key != right.key
                {
                    return None;
                }
                let (x2, lt) = derive_view(x, dir, branch_view(left, right, Side::L))?;
                let (y2, rt) = derive_view(y, dir, branch_view(left, right, Side::R))?;
                return Some((
                    Process::par(x2, y2),
                    DerivationTree {
                        rule: Rule::Syn,
                        direction: dir,
                        side: None,
                        premises: vec![lt, rt],
                    },
                ));
            }
            let side = match t.head()? {
                Decorator::ParL => Side::L,
                Decorator::ParR => Side::R,
                _ => return None,
            };
            let (moving, idle) = match side {
                Side::L => (x, y),
                Side::R => (y, x),
            };
            let key = t.key();
            if has_key(idle, key) {
                return None;
            }
            let (m2, sub) = derive_view(moving, dir, t.tail())?;
            let target = match side {
                Side::L => Process::Par(Arc::new(m2), y.clone()),
                Side::R => Process::Par(x.clone(), Arc::new(m2)),
            };
            Some((
                target,
                DerivationTree::unary(Rule::Par(side), dir, SideCondition::KeyAbsent(key), sub),
            ))
        }
        Process::Restrict(a, x) => {
            let label = t.label();
            if label.name() == Some(a) {
                return None;
            }
            let (x2, sub) = derive_view(x, dir, t)?;
            Some((
                Process::restrict(a.clone(), x2),
                DerivationTree::unary(
                    Rule::Nu,
                    dir,
                    SideCondition::Unrestricted {
                        label,
                        name: a.clone(),
                    },
                    sub,
                ),
            ))
        }
    }
}

/// Re-checks a transition against its derivation tree, rule by rule,
/// without searching.
pub fn check_transition(t: &Transition) -> bool {
    check_node(
        &t.source,
        t.direction,
        t.label.view(),
        &t.target,
        &t.derivation,
    )
}

fn check_node(
    src: &Process,
    dir: Direction,
    t: LabelView<'_>,
    tgt: &Process,
    tree: &DerivationTree,
) -> bool {
    if tree.direction != dir {
        return false;
    }
    // Forward rules read left to right, backward rules right to left.
    let (before, after) = match dir {
        Direction::Forward => (src, tgt),
        Direction::Backward => (tgt, src),
    };
    match tree.rule {
        Rule::Pref => {
            let (Process::Prefix(alpha, x), Process::Keyed(beta, k, x2)) = (before, after) else {
                return false;
            };
            let LabelView::Base {
                path: [],
                label,
                key,
            } = t
            else {
                return false;
            };
            tree.premises.is_empty()
                && tree.side == Some(SideCondition::Standard)
                && alpha == beta
                && x == x2
                && label == alpha
                && key == *k
                && is_std(x)
        }
        Rule::KPref => {
            let (Process::Keyed(alpha, k, x), Process::Keyed(beta, k2, x2)) = (src, tgt) else {
                return false;
            };
            let key = t.key();
            alpha == beta
                && k == k2
                && key != *k
                && tree.side
                    == Some(SideCondition::KeyDiffers {
                        key,
                        prefix_key: *k,
                    })
                && single(tree).is_some_and(|sub| check_node(x, dir, t, x2, sub))
        }
        Rule::Sum(side) => {
            let (Process::Sum(x, y), Process::Sum(x2, y2)) = (src, tgt) else {
                return false;
            };
            if t.head() != Some(Decorator::sum(side)) || tree.side != Some(SideCondition::Standard)
            {
                return false;
            }
            let (m, m2, idle, idle2) = match side {
                Side::L => (x, x2, y, y2),
                Side::R => (y, y2, x, x2),
            };
            idle == idle2
                && is_std(idle)
                && single(tree).is_some_and(|sub| check_node(m, dir, t.tail(), m2, sub))
        }
        Rule::Par(side) => {
            let (Process::Par(x, y), Process::Par(x2, y2)) = (src, tgt) else {
                return false;
            };
            if t.head() != Some(Decorator::par(side)) {
                return false;
            }
            let (m, m2, idle, idle2) = match side {
                Side::L => (x, x2, y, y2),
                Side::R => (y, y2, x, x2),
            };
            let key = t.key();
            idle == idle2
                && !has_key(idle, key)
                && tree.side == Some(SideCondition::KeyAbsent(key))
                && single(tree).is_some_and(|sub| check_node(m, dir, t.tail(), m2, sub))
        }
        Rule::Syn => {
            let (Process::Par(x, y), Process::Par(x2, y2)) = (src, tgt) else {
                return false;
            };
            let Some((left, right)) = t.as_pair() else {
                return false;
            };
            let [lt, rt] = tree.premises.as_slice() else {
                return false;
            };
            tree.side.is_none()
                && !left.label.is_tau()
                && left.label.is_complement_of(&right.label)
                && left.key == right.key
                && check_node(x, dir, left.into(), x2, lt)
                && check_node(y, dir, right.into(), y2, rt)
        }
        Rule::Nu => {
            let (Process::Restrict(a, x), Process::Restrict(b, x2)) = (src, tgt) else {
                return false;
            };
            let label = t.label();
            a == b
                && label.name() != Some(a)
                && tree.side
                    == Some(SideCondition::Unrestricted {
                        label,
                        name: a.clone(),
                    })
                && single(tree).is_some_and(|sub| check_node(x, dir, t, x2, sub))
        }
    }
}

fn single(tree: &DerivationTree) -> Option<&DerivationTree> {
    match tree.premises.as_slice() {
        [only] => Some(only),
        _ => None,
    }
}

/// The inverse step: same label, opposite direction, source and target
/// swapped. Fails only if the loop lemma does not hold for `t`.
pub fn reverse(t: &Transition) -> Result<Transition, LtsError> {
    derive(&t.target, t.direction.flip(), &t.label)
        .filter(|r| r.target == t.source)
        .ok_or_else(|| LtsError::LoopLemma(t.to_string()))
}
