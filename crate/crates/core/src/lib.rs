//! Reversible CCS with proof-keyed labels: syntax, proved transitions,
//! reachability, causality relations on labels, and exhaustive checks of
//! their metatheory on bounded corpora.

pub mod causality;
pub mod corpus;
pub mod lts;
pub mod prooflabels;
pub mod reach;
pub mod syntax;
pub mod theorems;

pub use causality::{CausalDerivation, CausalRule, Relation};
pub use corpus::Scale;
pub use lts::{Direction, FreshKeyPolicy, Transition};
pub use prooflabels::{Decorator, ProofLabel};
pub use reach::{Path, ReachError, TransitionGraph};
pub use syntax::{Key, Label, Name, Process};
