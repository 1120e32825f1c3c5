//! First-order programming: a language whose sentences evaluate to bounded
//! numbers, with exact-rational MILP machinery for deciding feasibility and
//! entailment over finite groundings and by lifted Gomory cuts.

#![allow(clippy::should_implement_trait, clippy::needless_range_loop)]

pub mod ast;
pub mod eval;
pub mod exec;
pub mod ground;
pub mod lifted;
pub mod milp;
pub mod normal;
pub mod parser;
pub mod rational;

pub use ast::{Atom, Formula, Literal, PredAtom, Range, Signature, Sort, Substitution, SumClause, Superclause, Term};
pub use rational::Q;
