//! Syntactic objects of first-order programs: terms, atoms, formulas, clauses,
//! substitutions, and the canonical printer.
//!
//! Variables and object constants share the term namespace and are told apart
//! lexically: a bare identifier starting with an uppercase letter or a digit,
//! or the reserved `nil`, is a constant; anything else is a variable. A
//! lowercase zero-argument function is written with empty parentheses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_q, Q};

/// The constant every problem declares implicitly.
pub const NIL: &str = "nil";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("substitution binds `{0}` and also mentions it on a right-hand side")]
    CyclicSubstitution(String),
    #[error("symbol `{name}` declared with arity {declared}, used with {used}")]
    Arity {
        name: String,
        declared: usize,
        used: usize,
    },
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("invalid range [{lo}, {hi}] for `{name}`")]
    InvalidRange { name: String, lo: String, hi: String },
}

/// True when a bare identifier in term position denotes an object constant.
pub fn is_constant_name(name: &str) -> bool {
    name == NIL
        || name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
}

// ---------------------------------------------------------------------------
// Terms and atoms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// Function application; object constants are zero-argument applications.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Nesting depth: constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn collect_funcs(&self, out: &mut BTreeMap<String, usize>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone(), args.len());
            args.iter().for_each(|a| a.collect_funcs(out));
        }
    }

    pub fn substitute(&self, sub: &Substitution) -> Term {
        match self {
            Term::Var(v) => sub.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(sub)).collect()),
        }
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }
}

/// A predicate applied to terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredAtom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl PredAtom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        PredAtom { pred: pred.into(), args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn substitute(&self, sub: &Substitution) -> PredAtom {
        PredAtom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.substitute(sub)).collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> PredAtom {
        PredAtom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.rename(map)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Scalar(Q),
    Pred(PredAtom),
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Sort {
    Integer,
    Real,
}

/// Closed interval of values a predicate may take.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Range {
    pub lo: Q,
    pub hi: Q,
    pub sort: Sort,
}

impl Range {
    pub fn new(lo: Q, hi: Q, sort: Sort) -> Self {
        Range { lo, hi, sort }
    }

    pub fn boolean() -> Self {
        Range::new(Q::zero(), Q::one(), Sort::Integer)
    }

    /// Tightened bounds: integer sorts round inward.
    pub fn effective(&self) -> (Q, Q) {
        match self.sort {
            Sort::Integer => (self.lo.ceil(), self.hi.floor()),
            Sort::Real => (self.lo.clone(), self.hi.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDecl {
    pub arity: usize,
    pub range: Range,
}

/// Declared predicate and function symbols. `nil` is always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub preds: BTreeMap<String, PredDecl>,
    pub funcs: BTreeMap<String, usize>,
}

impl Default for Signature {
    fn default() -> Self {
        let mut funcs = BTreeMap::new();
        funcs.insert(NIL.to_string(), 0);
        Signature { preds: BTreeMap::new(), funcs }
    }
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_pred(&mut self, name: impl Into<String>, arity: usize, range: Range) -> Result<(), AstError> {
        let name = name.into();
        if range.lo > range.hi {
            return Err(AstError::InvalidRange {
                name,
                lo: fmt_q(&range.lo),
                hi: fmt_q(&range.hi),
            });
        }
        if let Some(prev) = self.preds.get(&name) {
            if prev.arity != arity {
                return Err(AstError::Arity {
                    name,
                    declared: prev.arity,
                    used: arity,
                });
            }
        }
        self.preds.insert(name, PredDecl { arity, range });
        Ok(())
    }

    pub fn declare_func(&mut self, name: impl Into<String>, arity: usize) -> Result<(), AstError> {
        let name = name.into();
        if let Some(&prev) = self.funcs.get(&name) {
            if prev != arity {
                return Err(AstError::Arity {
                    name,
                    declared: prev,
                    used: arity,
                });
            }
        }
        self.funcs.insert(name, arity);
        Ok(())
    }

    pub fn pred(&self, name: &str) -> Option<&PredDecl> {
        self.preds.get(name)
    }

    pub fn range(&self, name: &str) -> Option<&Range> {
        self.preds.get(name).map(|d| &d.range)
    }

    /// Checks every symbol of `f` against the declarations.
    pub fn check(&self, f: &Formula) -> Result<(), AstError> {
        let mut preds = BTreeMap::new();
        let mut funcs = BTreeMap::new();
        f.collect_symbols(&mut preds, &mut funcs);
        for (p, arity) in preds {
            match self.preds.get(&p) {
                None => return Err(AstError::Undeclared { kind: "predicate", name: p }),
                Some(d) if d.arity != arity => {
                    return Err(AstError::Arity {
                        name: p,
                        declared: d.arity,
                        used: arity,
                    })
                }
                _ => {}
            }
        }
        for (g, arity) in funcs {
            match self.funcs.get(&g) {
                None => return Err(AstError::Undeclared { kind: "function", name: g }),
                Some(&d) if d != arity => {
                    return Err(AstError::Arity {
                        name: g,
                        declared: d,
                        used: arity,
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Neg(Box<Formula>),
    Scale(Q, Box<Formula>),
    Add(Box<Formula>, Box<Formula>),
    Sub(Box<Formula>, Box<Formula>),
    /// Binary minimum, written `^`.
    Min(Box<Formula>, Box<Formula>),
    /// Binary maximum, written `v`.
    Max(Box<Formula>, Box<Formula>),
    /// Infimum quantifier, written `!x.`.
    Inf(String, Box<Formula>),
    /// Supremum quantifier, written `?x.`.
    Sup(String, Box<Formula>),
}

impl Formula {
    pub fn scalar(c: Q) -> Formula {
        Formula::Atom(Atom::Scalar(c))
    }

    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Pred(PredAtom::new(name, args)))
    }

    pub fn neg(self) -> Formula {
        Formula::Neg(Box::new(self))
    }

    pub fn scale(c: Q, f: Formula) -> Formula {
        Formula::Scale(c, Box::new(f))
    }

    pub fn add(a: Formula, b: Formula) -> Formula {
        Formula::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Formula, b: Formula) -> Formula {
        Formula::Sub(Box::new(a), Box::new(b))
    }

    pub fn min(a: Formula, b: Formula) -> Formula {
        Formula::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Formula, b: Formula) -> Formula {
        Formula::Max(Box::new(a), Box::new(b))
    }

    pub fn inf(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Inf(v.into(), Box::new(body))
    }

    pub fn sup(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Sup(v.into(), Box::new(body))
    }

    /// Left-nested minimum of a nonempty list.
    pub fn min_all(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::min)
    }

    pub fn max_all(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::max)
    }

    /// Wraps the free variables (in first-occurrence order) in infimum quantifiers.
    pub fn close_inf(self) -> Formula {
        let vars = self.free_vars_ordered();
        vars.into_iter().rev().fold(self, |acc, v| Formula::inf(v, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.free_vars_ordered().into_iter().collect()
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars_ordered(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Atom(Atom::Scalar(_)) => {}
            Formula::Atom(Atom::Pred(p)) => {
                let mut vs = Vec::new();
                p.collect_vars(&mut vs);
                for v in vs {
                    if !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            Formula::Neg(a) | Formula::Scale(_, a) => a.collect_free(bound, out),
            Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Inf(v, body) | Formula::Sup(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_all_vars(&mut out);
        out
    }

    fn visit_all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(Atom::Scalar(_)) => {}
            Formula::Atom(Atom::Pred(p)) => {
                let mut vs = Vec::new();
                p.collect_vars(&mut vs);
                out.extend(vs);
            }
            Formula::Neg(a) | Formula::Scale(_, a) => a.visit_all_vars(out),
            Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.visit_all_vars(out);
                b.visit_all_vars(out);
            }
            Formula::Inf(v, body) | Formula::Sup(v, body) => {
                out.insert(v.clone());
                body.visit_all_vars(out);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars_ordered().is_empty()
    }

    /// Predicate symbols (with arity) and function symbols (with arity).
    pub fn collect_symbols(&self, preds: &mut BTreeMap<String, usize>, funcs: &mut BTreeMap<String, usize>) {
        match self {
            Formula::Atom(Atom::Scalar(_)) => {}
            Formula::Atom(Atom::Pred(p)) => {
                preds.insert(p.pred.clone(), p.args.len());
                p.args.iter().for_each(|t| t.collect_funcs(funcs));
            }
            Formula::Neg(a) | Formula::Scale(_, a) | Formula::Inf(_, a) | Formula::Sup(_, a) => {
                a.collect_symbols(preds, funcs)
            }
            Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.collect_symbols(preds, funcs);
                b.collect_symbols(preds, funcs);
            }
        }
    }

    /// Every scalar that occurs, as coefficient or constant.
    pub fn scalars(&self) -> Vec<Q> {
        let mut out = Vec::new();
        self.visit_scalars(&mut out);
        out
    }

    fn visit_scalars(&self, out: &mut Vec<Q>) {
        match self {
            Formula::Atom(Atom::Scalar(c)) => out.push(c.clone()),
            Formula::Atom(Atom::Pred(_)) => {}
            Formula::Scale(c, a) => {
                out.push(c.clone());
                a.visit_scalars(out);
            }
            Formula::Neg(a) | Formula::Inf(_, a) | Formula::Sup(_, a) => a.visit_scalars(out),
            Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.visit_scalars(out);
                b.visit_scalars(out);
            }
        }
    }

    /// Capture-avoiding application of `sub` to free occurrences.
    pub fn substitute(&self, sub: &Substitution) -> Formula {
        if sub.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Atom(Atom::Scalar(_)) => self.clone(),
            Formula::Atom(Atom::Pred(p)) => Formula::Atom(Atom::Pred(p.substitute(sub))),
            Formula::Neg(a) => Formula::Neg(Box::new(a.substitute(sub))),
            Formula::Scale(c, a) => Formula::Scale(c.clone(), Box::new(a.substitute(sub))),
            Formula::Add(a, b) => Formula::add(a.substitute(sub), b.substitute(sub)),
            Formula::Sub(a, b) => Formula::sub(a.substitute(sub), b.substitute(sub)),
            Formula::Min(a, b) => Formula::min(a.substitute(sub), b.substitute(sub)),
            Formula::Max(a, b) => Formula::max(a.substitute(sub), b.substitute(sub)),
            Formula::Inf(v, body) | Formula::Sup(v, body) => {
                let is_inf = matches!(self, Formula::Inf(..));
                let inner = sub.without(v);
                let body_free = body.free_vars();
                let captures = inner
                    .bindings
                    .iter()
                    .any(|(k, t)| body_free.contains(k) && term_mentions(t, v));
                let (v2, body2) = if captures {
                    let mut avoid = body.all_vars();
                    for t in inner.bindings.values() {
                        let mut vs = Vec::new();
                        t.collect_vars(&mut vs);
                        avoid.extend(vs);
                    }
                    let fresh = first_free_name(v, &avoid);
                    let mut ren = BTreeMap::new();
                    ren.insert(v.clone(), Term::Var(fresh.clone()));
                    let renamed = body.substitute(&Substitution { bindings: ren });
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                let nb = body2.substitute(&inner);
                if is_inf {
                    Formula::inf(v2, nb)
                } else {
                    Formula::sup(v2, nb)
                }
            }
        }
    }

    /// Renames every occurrence (binding sites included) according to `map`.
    pub fn rename_all(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::Atom(Atom::Scalar(_)) => self.clone(),
            Formula::Atom(Atom::Pred(p)) => Formula::Atom(Atom::Pred(p.rename(map))),
            Formula::Neg(a) => Formula::Neg(Box::new(a.rename_all(map))),
            Formula::Scale(c, a) => Formula::Scale(c.clone(), Box::new(a.rename_all(map))),
            Formula::Add(a, b) => Formula::add(a.rename_all(map), b.rename_all(map)),
            Formula::Sub(a, b) => Formula::sub(a.rename_all(map), b.rename_all(map)),
            Formula::Min(a, b) => Formula::min(a.rename_all(map), b.rename_all(map)),
            Formula::Max(a, b) => Formula::max(a.rename_all(map), b.rename_all(map)),
            Formula::Inf(v, b) => Formula::inf(map.get(v).cloned().unwrap_or_else(|| v.clone()), b.rename_all(map)),
            Formula::Sup(v, b) => Formula::sup(map.get(v).cloned().unwrap_or_else(|| v.clone()), b.rename_all(map)),
        }
    }

    /// Canonical ASCII rendering (same as `Display`).
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        write_formula(self, Notation::Ascii, 0, &mut s);
        s
    }

    pub fn to_unicode(&self) -> String {
        let mut s = String::new();
        write_formula(self, Notation::Unicode, 0, &mut s);
        s
    }
}

fn term_mentions(t: &Term, v: &str) -> bool {
    match t {
        Term::Var(x) => x == v,
        Term::App(_, args) => args.iter().any(|a| term_mentions(a, v)),
    }
}

fn first_free_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|n| !avoid.contains(n) && n != "v")
        .expect("unbounded name supply")
}

// ---------------------------------------------------------------------------
// Clauses
// ---------------------------------------------------------------------------

/// A scalar multiple of an atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub coeff: Q,
    pub atom: Atom,
}

impl Literal {
    pub fn new(coeff: Q, atom: Atom) -> Self {
        Literal { coeff, atom }
    }

    pub fn pred(coeff: Q, p: PredAtom) -> Self {
        Literal { coeff, atom: Atom::Pred(p) }
    }

    pub fn constant(c: Q) -> Self {
        Literal {
            coeff: Q::one(),
            atom: Atom::Scalar(c),
        }
    }
}

/// A sum of literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SumClause {
    pub literals: Vec<Literal>,
}

impl SumClause {
    pub fn new(literals: Vec<Literal>) -> Self {
        SumClause { literals }
    }

    /// Builds a clause from merged `(coefficient, atom)` terms plus a constant.
    pub fn from_terms(terms: impl IntoIterator<Item = (Q, PredAtom)>, constant: Q) -> Self {
        let mut literals: Vec<Literal> = terms.into_iter().map(|(c, p)| Literal::pred(c, p)).collect();
        literals.push(Literal::constant(constant));
        SumClause { literals }.simplified()
    }

    pub fn constant(&self) -> Q {
        self.literals
            .iter()
            .filter_map(|l| match &l.atom {
                Atom::Scalar(c) => Some(&l.coeff * c),
                Atom::Pred(_) => None,
            })
            .fold(Q::zero(), |a, b| a + b)
    }

    /// Predicate terms merged by textual identity, in first-occurrence order,
    /// zero coefficients dropped.
    pub fn pred_terms(&self) -> Vec<(Q, PredAtom)> {
        let mut out: Vec<(Q, PredAtom)> = Vec::new();
        for l in &self.literals {
            if let Atom::Pred(p) = &l.atom {
                if let Some(slot) = out.iter_mut().find(|(_, q)| q == p) {
                    slot.0 += &l.coeff;
                } else {
                    out.push((l.coeff.clone(), p.clone()));
                }
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        out
    }

    /// Canonical form: merged predicate literals, then one nonzero constant.
    pub fn simplified(&self) -> SumClause {
        let mut literals: Vec<Literal> = self
            .pred_terms()
            .into_iter()
            .map(|(c, p)| Literal::pred(c, p))
            .collect();
        let k = self.constant();
        if !k.is_zero() {
            literals.push(Literal::constant(k));
        }
        SumClause { literals }
    }

    pub fn is_ground(&self) -> bool {
        self.literals.iter().all(|l| match &l.atom {
            Atom::Scalar(_) => true,
            Atom::Pred(p) => p.is_ground(),
        })
    }

    pub fn free_vars_ordered(&self) -> Vec<String> {
        let mut out = Vec::new();
        for l in &self.literals {
            if let Atom::Pred(p) = &l.atom {
                p.collect_vars(&mut out);
            }
        }
        out
    }

    pub fn substitute(&self, sub: &Substitution) -> SumClause {
        SumClause {
            literals: self
                .literals
                .iter()
                .map(|l| Literal {
                    coeff: l.coeff.clone(),
                    atom: match &l.atom {
                        Atom::Scalar(c) => Atom::Scalar(c.clone()),
                        Atom::Pred(p) => Atom::Pred(p.substitute(sub)),
                    },
                })
                .collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> SumClause {
        SumClause {
            literals: self
                .literals
                .iter()
                .map(|l| Literal {
                    coeff: l.coeff.clone(),
                    atom: match &l.atom {
                        Atom::Scalar(c) => Atom::Scalar(c.clone()),
                        Atom::Pred(p) => Atom::Pred(p.rename(map)),
                    },
                })
                .collect(),
        }
    }

    pub fn scaled(&self, c: &Q) -> SumClause {
        SumClause {
            literals: self
                .literals
                .iter()
                .map(|l| Literal::new(&l.coeff * c, l.atom.clone()))
                .collect(),
        }
    }

    pub fn plus(&self, other: &SumClause) -> SumClause {
        let mut literals = self.literals.clone();
        literals.extend(other.literals.iter().cloned());
        SumClause { literals }
    }

    pub fn to_formula(&self) -> Formula {
        let mut acc: Option<Formula> = None;
        for l in &self.literals {
            let (neg, f) = literal_formula(l);
            acc = Some(match (acc, neg) {
                (None, false) => f,
                (None, true) => match f {
                    Formula::Atom(Atom::Scalar(c)) => Formula::scalar(-c),
                    Formula::Scale(c, b) => Formula::Scale(-c, b),
                    other => other.neg(),
                },
                (Some(a), false) => Formula::add(a, f),
                (Some(a), true) => Formula::sub(a, f),
            });
        }
        acc.unwrap_or_else(|| Formula::scalar(Q::zero()))
    }

    /// Renames variables to `v1, v2, ...` by first occurrence, for comparison
    /// up to alpha-equivalence.
    pub fn canonical_vars(&self) -> SumClause {
        let map: BTreeMap<String, String> = self
            .free_vars_ordered()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, format!("_v{i}")))
            .collect();
        self.rename(&map)
    }

    pub fn alpha_eq(&self, other: &SumClause) -> bool {
        self.simplified().canonical_vars() == other.simplified().canonical_vars()
    }
}

/// `(is_subtracted, positive formula)` for a literal in a sum.
fn literal_formula(l: &Literal) -> (bool, Formula) {
    match &l.atom {
        Atom::Scalar(c) => {
            let v = &l.coeff * c;
            if v.is_negative() {
                (true, Formula::scalar(-v))
            } else {
                (false, Formula::scalar(v))
            }
        }
        Atom::Pred(p) => {
            let a = Formula::Atom(Atom::Pred(p.clone()));
            let neg = l.coeff.is_negative();
            let c = l.coeff.abs();
            if c.is_one() {
                (neg, a)
            } else {
                (neg, Formula::scale(c, a))
            }
        }
    }
}

/// A maximum of sum-clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Superclause {
    pub disjuncts: Vec<SumClause>,
}

impl Superclause {
    pub fn new(disjuncts: Vec<SumClause>) -> Self {
        assert!(!disjuncts.is_empty(), "superclause needs a disjunct");
        Superclause { disjuncts }
    }

    pub fn free_vars_ordered(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in &self.disjuncts {
            for v in d.free_vars_ordered() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn to_formula(&self) -> Formula {
        Formula::max_all(self.disjuncts.iter().map(SumClause::to_formula)).expect("nonempty")
    }
}

// ---------------------------------------------------------------------------
// Substitutions and fresh names
// ---------------------------------------------------------------------------

/// Mapping from variables to terms. No right-hand side mentions a bound key.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new(bindings: BTreeMap<String, Term>) -> Result<Self, AstError> {
        for t in bindings.values() {
            let mut vs = Vec::new();
            t.collect_vars(&mut vs);
            if let Some(v) = vs.into_iter().find(|v| bindings.contains_key(v)) {
                return Err(AstError::CyclicSubstitution(v));
            }
        }
        Ok(Substitution { bindings })
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, AstError>
    where
        I: IntoIterator<Item = (S, Term)>,
        S: Into<String>,
    {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn bindings(&self) -> &BTreeMap<String, Term> {
        &self.bindings
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.bindings.keys()
    }

    pub fn is_ground(&self) -> bool {
        self.bindings.values().all(Term::is_ground)
    }

    fn without(&self, v: &str) -> Substitution {
        let mut b = self.bindings.clone();
        b.remove(v);
        Substitution { bindings: b }
    }

    /// Composition `self/other`, so that `S/(V/W) = (S/V)/W`.
    pub fn compose(&self, other: &Substitution) -> Result<Substitution, AstError> {
        let mut b: BTreeMap<String, Term> = self
            .bindings
            .iter()
            .map(|(k, t)| (k.clone(), t.substitute(other)))
            .collect();
        for (k, t) in &other.bindings {
            b.entry(k.clone()).or_insert_with(|| t.clone());
        }
        b.retain(|k, t| *t != Term::Var(k.clone()));
        Substitution::new(b)
    }
}

/// Deterministic fresh-name supply: stem plus a monotone counter.
#[derive(Clone, Debug, Default)]
pub struct NameSource {
    counter: u64,
    reserved: BTreeSet<String>,
}

impl NameSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// Names that `fresh` must never return.
    pub fn reserve<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.reserved.extend(names.into_iter().map(Into::into));
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        loop {
            self.counter += 1;
            let name = format!("{stem}{}", self.counter);
            if !self.reserved.contains(&name) {
                self.reserved.insert(name.clone());
                return name;
            }
        }
    }
}

/// Renames binders (and, when `rename_free` is set, free variables) so no two
/// binding sites and no two inputs share a variable name. Returns each output
/// with the renaming applied to it, keyed by new name.
pub fn standardize_apart(
    exprs: &[Formula],
    names: &mut NameSource,
    rename_free: bool,
) -> Vec<(Formula, BTreeMap<String, String>)> {
    for e in exprs {
        names.reserve(e.all_vars());
    }
    exprs
        .iter()
        .map(|e| {
            let mut inverse = BTreeMap::new();
            let free: BTreeMap<String, String> = if rename_free {
                e.free_vars_ordered()
                    .into_iter()
                    .map(|v| {
                        let n = names.fresh(&v);
                        inverse.insert(n.clone(), v.clone());
                        (v, n)
                    })
                    .collect()
            } else {
                BTreeMap::new()
            };
            let out = rename_binders(e, &free, names, &mut inverse);
            (out, inverse)
        })
        .collect()
}

fn rename_binders(
    f: &Formula,
    env: &BTreeMap<String, String>,
    names: &mut NameSource,
    inverse: &mut BTreeMap<String, String>,
) -> Formula {
    match f {
        Formula::Atom(Atom::Scalar(_)) => f.clone(),
        Formula::Atom(Atom::Pred(p)) => Formula::Atom(Atom::Pred(p.rename(env))),
        Formula::Neg(a) => rename_binders(a, env, names, inverse).neg(),
        Formula::Scale(c, a) => Formula::scale(c.clone(), rename_binders(a, env, names, inverse)),
        Formula::Add(a, b) => Formula::add(rename_binders(a, env, names, inverse), rename_binders(b, env, names, inverse)),
        Formula::Sub(a, b) => Formula::sub(rename_binders(a, env, names, inverse), rename_binders(b, env, names, inverse)),
        Formula::Min(a, b) => Formula::min(rename_binders(a, env, names, inverse), rename_binders(b, env, names, inverse)),
        Formula::Max(a, b) => Formula::max(rename_binders(a, env, names, inverse), rename_binders(b, env, names, inverse)),
        Formula::Inf(v, b) | Formula::Sup(v, b) => {
            let n = names.fresh(v);
            inverse.insert(n.clone(), v.clone());
            let mut env2 = env.clone();
            env2.insert(v.clone(), n.clone());
            let body = rename_binders(b, &env2, names, inverse);
            if matches!(f, Formula::Inf(..)) {
                Formula::inf(n, body)
            } else {
                Formula::sup(n, body)
            }
        }
    }
}

/// Renames the variables of each clause apart from each other and from `avoid`.
pub fn standardize_clauses_apart(clauses: &[SumClause], names: &mut NameSource) -> Vec<SumClause> {
    clauses
        .iter()
        .map(|c| {
            let map: BTreeMap<String, String> = c
                .free_vars_ordered()
                .into_iter()
                .map(|v| {
                    let n = names.fresh(&v);
                    (v, n)
                })
                .collect();
            c.rename(&map)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum Notation {
    Ascii,
    Unicode,
}

const PREC_QUANT: u8 = 0;
const PREC_MAX: u8 = 1;
const PREC_MIN: u8 = 2;
const PREC_SUM: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) => PREC_ATOM,
        Formula::Neg(_) | Formula::Scale(..) => PREC_UNARY,
        Formula::Add(..) | Formula::Sub(..) => PREC_SUM,
        Formula::Min(..) => PREC_MIN,
        Formula::Max(..) => PREC_MAX,
        Formula::Inf(..) | Formula::Sup(..) => PREC_QUANT,
    }
}

fn write_formula(f: &Formula, n: Notation, min_prec: u8, out: &mut String) {
    let p = prec(f);
    let paren = p < min_prec;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom(Atom::Scalar(c)) => out.push_str(&fmt_q(c)),
        Formula::Atom(Atom::Pred(a)) => out.push_str(&a.to_string()),
        Formula::Neg(a) => {
            out.push(if n == Notation::Unicode { '−' } else { '-' });
            let wrap = matches!(**a, Formula::Scale(..) | Formula::Atom(Atom::Scalar(_)));
            write_formula(a, n, if wrap { PREC_ATOM + 1 } else { PREC_UNARY }, out);
        }
        Formula::Scale(c, a) => {
            out.push_str(&fmt_q(c));
            out.push_str(if n == Notation::Unicode { "·" } else { "*" });
            write_formula(a, n, PREC_ATOM, out);
        }
        Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
            let op = match (f, n) {
                (Formula::Add(..), _) => " + ",
                (Formula::Sub(..), Notation::Ascii) => " - ",
                (Formula::Sub(..), Notation::Unicode) => " − ",
                (Formula::Min(..), Notation::Ascii) => " ^ ",
                (Formula::Min(..), Notation::Unicode) => " ∧ ",
                (Formula::Max(..), Notation::Ascii) => " v ",
                _ => " ∨ ",
            };
            write_formula(a, n, p, out);
            out.push_str(op);
            write_formula(b, n, p + 1, out);
        }
        Formula::Inf(v, b) | Formula::Sup(v, b) => {
            let q = match (f, n) {
                (Formula::Inf(..), Notation::Ascii) => "!",
                (Formula::Inf(..), Notation::Unicode) => "⋀",
                (_, Notation::Ascii) => "?",
                _ => "⋁",
            };
            out.push_str(q);
            out.push_str(v);
            out.push_str(". ");
            write_formula(b, n, PREC_QUANT, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(name, args) if args.is_empty() => {
                if is_constant_name(name) {
                    f.write_str(name)
                } else {
                    write!(f, "{name}()")
                }
            }
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for PredAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(&self.pred);
        }
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

impl fmt::Display for SumClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Display for Superclause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {t}")?;
        }
        f.write_str("}")
    }
}
