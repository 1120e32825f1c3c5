//! Min-normal form, reduced normal form, interval bounds and the value
//! lattice spacing of integer-fragment sentences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Atom, Formula, Literal, PredAtom, Range, Signature, Sort, SumClause, Superclause, Term};
use crate::rational::{lcm_denominators, q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalError {
    #[error("predicate `{0}` is real-sorted; the sentence is outside the integer fragment")]
    NotIntegerFragment(String),
    #[error("undeclared predicate `{0}`")]
    Undeclared(String),
}

/// A Skolem function introduced for a supremum quantifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkolemFn {
    pub name: String,
    /// The quantified variable it replaces.
    pub var: String,
    /// Enclosing infimum variables, in order; these are the arguments.
    pub args: Vec<String>,
}

/// A quantifier-free conjunction of superclauses; free variables are
/// implicitly inf-quantified.
#[derive(Clone, Debug, PartialEq)]
pub struct MinNormalSentence {
    pub superclauses: Vec<Superclause>,
    pub free_vars: Vec<String>,
    pub skolems: Vec<SkolemFn>,
    /// Input signature extended with the Skolem functions.
    pub signature: Signature,
}

impl MinNormalSentence {
    pub fn to_formula(&self) -> Formula {
        Formula::min_all(self.superclauses.iter().map(Superclause::to_formula))
            .unwrap_or_else(|| Formula::scalar(Q::one()))
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

impl Interval {
    pub fn point(v: Q) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn scale(&self, c: &Q) -> Interval {
        let (a, b) = (c * &self.lo, c * &self.hi);
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn contains(&self, v: &Q) -> bool {
        &self.lo <= v && v <= &self.hi
    }
}

/// Where a reduced clause came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Single-disjunct superclause `i`, unchanged.
    Superclause { index: usize },
    /// Disjunct `j` of superclause `i`, guarded by an indicator.
    Disjunct { index: usize, disjunct: usize },
    /// Selector clause of superclause `i`.
    Selector { index: usize },
    /// A clause added after normalization (cuts, queries).
    Added,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Superclause { index } => write!(f, "superclause {}", index + 1),
            Provenance::Disjunct { index, disjunct } => {
                write!(f, "superclause {} disjunct {}", index + 1, disjunct + 1)
            }
            Provenance::Selector { index } => write!(f, "superclause {} selector", index + 1),
            Provenance::Added => f.write_str("added"),
        }
    }
}

/// An indicator predicate guarding one disjunct of a superclause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Indicator {
    pub pred: String,
    pub args: Vec<String>,
    pub superclause: usize,
    pub disjunct: usize,
    pub bound: Q,
}

/// A conjunction of sum-clauses; free variables are implicitly inf-quantified.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSentence {
    pub clauses: Vec<SumClause>,
    pub provenance: Vec<Provenance>,
    pub indicators: Vec<Indicator>,
    pub skolems: Vec<SkolemFn>,
    /// Signature extended with Skolem functions and indicator predicates.
    pub signature: Signature,
}

impl ReducedSentence {
    pub fn from_clauses(clauses: Vec<SumClause>, signature: Signature) -> Self {
        let provenance = vec![Provenance::Added; clauses.len()];
        ReducedSentence {
            clauses,
            provenance,
            indicators: Vec::new(),
            skolems: Vec::new(),
            signature,
        }
    }

    pub fn push(&mut self, clause: SumClause, prov: Provenance) {
        self.clauses.push(clause);
        self.provenance.push(prov);
    }

    /// Appends another reduced sentence's clauses and declarations.
    pub fn extend(&mut self, other: ReducedSentence) {
        self.clauses.extend(other.clauses);
        self.provenance.extend(other.provenance);
        self.indicators.extend(other.indicators);
        self.skolems.extend(other.skolems);
        for (k, v) in other.signature.preds {
            self.signature.preds.entry(k).or_insert(v);
        }
        for (k, v) in other.signature.funcs {
            self.signature.funcs.entry(k).or_insert(v);
        }
    }

    pub fn to_formula(&self) -> Formula {
        Formula::min_all(self.clauses.iter().map(SumClause::to_formula)).unwrap_or_else(|| Formula::scalar(Q::one()))
    }
}

// ---------------------------------------------------------------------------
// Step 1: negation and scalars inward
// ---------------------------------------------------------------------------

/// Pushes negation and scalar multiplication down to atoms. The result uses
/// only atoms, `Scale` over predicate atoms, `Add`, `Min`, `Max`, `Inf`, `Sup`.
pub fn push_inward(f: &Formula) -> Formula {
    push(f, &Q::one())
}

fn push(f: &Formula, c: &Q) -> Formula {
    if c.is_zero() {
        return Formula::scalar(Q::zero());
    }
    let pos = c.is_positive();
    match f {
        Formula::Atom(Atom::Scalar(v)) => Formula::scalar(c * v),
        Formula::Atom(Atom::Pred(_)) => {
            if c.is_one() {
                f.clone()
            } else {
                Formula::scale(c.clone(), f.clone())
            }
        }
        Formula::Neg(a) => push(a, &-c),
        Formula::Scale(d, a) => push(a, &(c * d)),
        Formula::Add(a, b) => Formula::add(push(a, c), push(b, c)),
        Formula::Sub(a, b) => Formula::add(push(a, c), push(b, &-c)),
        Formula::Min(a, b) if pos => Formula::min(push(a, c), push(b, c)),
        Formula::Min(a, b) => Formula::max(push(a, c), push(b, c)),
        Formula::Max(a, b) if pos => Formula::max(push(a, c), push(b, c)),
        Formula::Max(a, b) => Formula::min(push(a, c), push(b, c)),
        Formula::Inf(v, a) if pos => Formula::inf(v.clone(), push(a, c)),
        Formula::Inf(v, a) => Formula::sup(v.clone(), push(a, c)),
        Formula::Sup(v, a) if pos => Formula::sup(v.clone(), push(a, c)),
        Formula::Sup(v, a) => Formula::inf(v.clone(), push(a, c)),
    }
}

// ---------------------------------------------------------------------------
// Step 2: standardize binders apart, keeping names that are already unique
// ---------------------------------------------------------------------------

fn standardize_binders(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = f.free_vars();
    let all = f.all_vars();
    let mut env = BTreeMap::new();
    rename_dup_binders(f, &mut used, &all, &mut env)
}

fn rename_dup_binders(
    f: &Formula,
    used: &mut BTreeSet<String>,
    all: &BTreeSet<String>,
    env: &mut BTreeMap<String, String>,
) -> Formula {
    match f {
        Formula::Atom(Atom::Pred(p)) => Formula::Atom(Atom::Pred(p.rename(env))),
        Formula::Atom(_) => f.clone(),
        Formula::Neg(a) => rename_dup_binders(a, used, all, env).neg(),
        Formula::Scale(c, a) => Formula::scale(c.clone(), rename_dup_binders(a, used, all, env)),
        Formula::Add(a, b) | Formula::Sub(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
            let x = rename_dup_binders(a, used, all, env);
            let y = rename_dup_binders(b, used, all, env);
            match f {
                Formula::Add(..) => Formula::add(x, y),
                Formula::Sub(..) => Formula::sub(x, y),
                Formula::Min(..) => Formula::min(x, y),
                _ => Formula::max(x, y),
            }
        }
        Formula::Inf(v, a) | Formula::Sup(v, a) => {
            let name = if used.contains(v) {
                let stem = v.trim_end_matches(|c: char| c.is_ascii_digit());
                let stem = if stem.is_empty() { "x" } else { stem };
                (1..)
                    .map(|k| format!("{stem}{k}"))
                    .find(|n| !used.contains(n) && !all.contains(n) && n != "v")
                    .expect("unbounded names")
            } else {
                v.clone()
            };
            used.insert(name.clone());
            let saved = env.insert(v.clone(), name.clone());
            let body = rename_dup_binders(a, used, all, env);
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            if matches!(f, Formula::Inf(..)) {
                Formula::inf(name, body)
            } else {
                Formula::sup(name, body)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Steps 3 and 4: Skolemize suprema, drop infima
// ---------------------------------------------------------------------------

struct Skolemizer<'a> {
    taken: BTreeSet<String>,
    skolems: Vec<SkolemFn>,
    sig: &'a mut Signature,
}

impl Skolemizer<'_> {
    fn fresh_fn(&mut self, var: &str) -> String {
        let stem = var.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
        let stem = if stem.is_empty() { "sk" } else { stem };
        let candidates = std::iter::once(stem.to_string()).chain((1..).map(|k| format!("{stem}{k}")));
        for c in candidates {
            if !self.taken.contains(&c) && !crate::ast::is_constant_name(&c) {
                self.taken.insert(c.clone());
                return c;
            }
        }
        unreachable!()
    }

    fn run(&mut self, f: &Formula, enclosing: &mut Vec<String>, sub: &BTreeMap<String, Term>) -> Formula {
        match f {
            Formula::Atom(Atom::Pred(p)) => Formula::Atom(Atom::Pred(PredAtom::new(
                p.pred.clone(),
                p.args.iter().map(|t| subst_map(t, sub)).collect(),
            ))),
            Formula::Atom(_) => f.clone(),
            Formula::Neg(a) => self.run(a, enclosing, sub).neg(),
            Formula::Scale(c, a) => Formula::scale(c.clone(), self.run(a, enclosing, sub)),
            Formula::Add(a, b) => Formula::add(self.run(a, enclosing, sub), self.run(b, enclosing, sub)),
            Formula::Sub(a, b) => Formula::sub(self.run(a, enclosing, sub), self.run(b, enclosing, sub)),
            Formula::Min(a, b) => Formula::min(self.run(a, enclosing, sub), self.run(b, enclosing, sub)),
            Formula::Max(a, b) => Formula::max(self.run(a, enclosing, sub), self.run(b, enclosing, sub)),
            Formula::Inf(v, a) => {
                enclosing.push(v.clone());
                let r = self.run(a, enclosing, sub);
                enclosing.pop();
                r
            }
            Formula::Sup(v, a) => {
                let name = self.fresh_fn(v);
                let args: Vec<Term> = enclosing.iter().map(|e| Term::Var(e.clone())).collect();
                self.sig
                    .declare_func(name.clone(), args.len())
                    .expect("fresh Skolem symbol");
                self.skolems.push(SkolemFn {
                    name: name.clone(),
                    var: v.clone(),
                    args: enclosing.clone(),
                });
                let mut sub2 = sub.clone();
                sub2.insert(v.clone(), Term::App(name, args));
                self.run(a, enclosing, &sub2)
            }
        }
    }
}

fn subst_map(t: &Term, sub: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => sub.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_map(a, sub)).collect()),
    }
}

// ---------------------------------------------------------------------------
// Step 5: distribute into a conjunction of maxima of sums
// ---------------------------------------------------------------------------

type Cnf = Vec<Vec<SumClause>>;

fn distribute(f: &Formula) -> Cnf {
    match f {
        Formula::Atom(Atom::Scalar(c)) => vec![vec![SumClause::new(vec![Literal::constant(c.clone())])]],
        Formula::Atom(Atom::Pred(p)) => vec![vec![SumClause::new(vec![Literal::pred(Q::one(), p.clone())])]],
        Formula::Scale(c, a) => match &**a {
            Formula::Atom(Atom::Pred(p)) => vec![vec![SumClause::new(vec![Literal::pred(c.clone(), p.clone())])]],
            other => distribute(&push(other, c)),
        },
        Formula::Add(a, b) => {
            let (x, y) = (distribute(a), distribute(b));
            let mut out = Vec::with_capacity(x.len() * y.len());
            for ci in &x {
                for dk in &y {
                    let mut disj = Vec::with_capacity(ci.len() * dk.len());
                    for s in ci {
                        for t in dk {
                            disj.push(s.plus(t).simplified());
                        }
                    }
                    out.push(dedup(disj));
                }
            }
            out
        }
        Formula::Min(a, b) => {
            let mut x = distribute(a);
            x.extend(distribute(b));
            x
        }
        Formula::Max(a, b) => {
            let (x, y) = (distribute(a), distribute(b));
            let mut out = Vec::with_capacity(x.len() * y.len());
            for ci in &x {
                for dk in &y {
                    let mut d = ci.clone();
                    d.extend(dk.iter().cloned());
                    out.push(dedup(d));
                }
            }
            out
        }
        Formula::Neg(_) | Formula::Sub(..) => distribute(&push_inward(f)),
        Formula::Inf(_, a) => distribute(a),
        Formula::Sup(..) => unreachable!("suprema are Skolemized before distribution"),
    }
}

fn dedup(v: Vec<SumClause>) -> Vec<SumClause> {
    let mut out: Vec<SumClause> = Vec::with_capacity(v.len());
    for c in v {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Converts `s` to min-normal form. Free variables of `s` are treated as
/// outermost infimum variables.
pub fn to_min_normal(s: &Formula, sig: &Signature) -> MinNormalSentence {
    let free_vars = s.free_vars_ordered();
    let pushed = push_inward(s);
    let apart = standardize_binders(&pushed);
    let mut signature = sig.clone();
    let taken: BTreeSet<String> = sig.funcs.keys().chain(sig.preds.keys()).cloned().collect();
    let mut sk = Skolemizer {
        taken,
        skolems: Vec::new(),
        sig: &mut signature,
    };
    let mut enclosing = free_vars.clone();
    let open = sk.run(&apart, &mut enclosing, &BTreeMap::new());
    let skolems = sk.skolems;
    let superclauses = distribute(&open)
        .into_iter()
        .map(|d| Superclause::new(d.into_iter().map(|c| c.simplified()).collect()))
        .collect();
    MinNormalSentence {
        superclauses,
        free_vars,
        skolems,
        signature,
    }
}

/// Reads a quantifier-free, min/max-free formula as a single sum-clause.
pub fn as_sum_clause(f: &Formula) -> Option<SumClause> {
    fn go(f: &Formula, out: &mut Vec<Literal>) -> bool {
        match f {
            Formula::Atom(Atom::Scalar(c)) => {
                out.push(Literal::constant(c.clone()));
                true
            }
            Formula::Atom(Atom::Pred(p)) => {
                out.push(Literal::pred(Q::one(), p.clone()));
                true
            }
            Formula::Scale(c, a) => match &**a {
                Formula::Atom(Atom::Pred(p)) => {
                    out.push(Literal::pred(c.clone(), p.clone()));
                    true
                }
                _ => false,
            },
            Formula::Add(a, b) => go(a, out) && go(b, out),
            _ => false,
        }
    }
    let mut lits = Vec::new();
    if go(&push_inward(f), &mut lits) {
        Some(SumClause::new(lits))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Interval bounds
// ---------------------------------------------------------------------------

fn pred_interval(p: &PredAtom, sig: &Signature) -> Interval {
    let r = sig
        .range(&p.pred)
        .cloned()
        .unwrap_or_else(Range::boolean);
    let (lo, hi) = r.effective();
    Interval { lo, hi }
}

/// Sound value interval of a sum-clause from its predicates' ranges.
pub fn interval_of(c: &SumClause, sig: &Signature) -> Interval {
    c.literals.iter().fold(Interval::point(Q::zero()), |acc, l| {
        let i = match &l.atom {
            Atom::Scalar(v) => Interval::point(v.clone()),
            Atom::Pred(p) => pred_interval(p, sig),
        };
        acc.add(&i.scale(&l.coeff))
    })
}

/// Sound value interval of an arbitrary formula.
pub fn formula_interval(f: &Formula, sig: &Signature) -> Interval {
    match f {
        Formula::Atom(Atom::Scalar(v)) => Interval::point(v.clone()),
        Formula::Atom(Atom::Pred(p)) => pred_interval(p, sig),
        Formula::Neg(a) => formula_interval(a, sig).scale(&-Q::one()),
        Formula::Scale(c, a) => formula_interval(a, sig).scale(c),
        Formula::Add(a, b) => formula_interval(a, sig).add(&formula_interval(b, sig)),
        Formula::Sub(a, b) => formula_interval(a, sig).add(&formula_interval(b, sig).scale(&-Q::one())),
        Formula::Min(a, b) | Formula::Max(a, b) => {
            let (x, y) = (formula_interval(a, sig), formula_interval(b, sig));
            if matches!(f, Formula::Min(..)) {
                Interval { lo: x.lo.min(y.lo), hi: x.hi.min(y.hi) }
            } else {
                Interval { lo: x.lo.max(y.lo), hi: x.hi.max(y.hi) }
            }
        }
        Formula::Inf(_, a) | Formula::Sup(_, a) => formula_interval(a, sig),
    }
}

// ---------------------------------------------------------------------------
// Reduced normal form
// ---------------------------------------------------------------------------

/// Replaces every multi-disjunct superclause by guarded disjuncts plus a
/// selector clause over fresh 0-1 indicator predicates.
pub fn to_reduced_normal(m: &MinNormalSentence) -> ReducedSentence {
    let mut sig = m.signature.clone();
    let mut clauses = Vec::new();
    let mut provenance = Vec::new();
    let mut indicators = Vec::new();
    for (i, sc) in m.superclauses.iter().enumerate() {
        if sc.disjuncts.len() == 1 {
            clauses.push(sc.disjuncts[0].clone());
            provenance.push(Provenance::Superclause { index: i });
            continue;
        }
        let args = sc.free_vars_ordered();
        let arg_terms: Vec<Term> = args.iter().map(|v| Term::Var(v.clone())).collect();
        let mut zs = Vec::new();
        for (j, l) in sc.disjuncts.iter().enumerate() {
            let mut name = format!("z_{}_{}", i + 1, j + 1);
            let mut k = 1;
            while sig.preds.contains_key(&name) {
                k += 1;
                name = format!("z_{}_{}_{k}", i + 1, j + 1);
            }
            sig.declare_pred(name.clone(), args.len(), Range::new(Q::zero(), Q::one(), Sort::Integer))
                .expect("fresh indicator");
            let z = PredAtom::new(name.clone(), arg_terms.clone());
            let bound = (-interval_of(l, &m.signature).lo).max(Q::zero());
            // L + B(1 - z) = L + B - B z
            let mut lits = l.literals.clone();
            if !bound.is_zero() {
                lits.push(Literal::pred(-bound.clone(), z.clone()));
                lits.push(Literal::constant(bound.clone()));
            }
            clauses.push(SumClause::new(lits).simplified());
            provenance.push(Provenance::Disjunct { index: i, disjunct: j });
            indicators.push(Indicator {
                pred: name,
                args: args.clone(),
                superclause: i,
                disjunct: j,
                bound,
            });
            zs.push(z);
        }
        let mut sel: Vec<Literal> = zs.into_iter().map(|z| Literal::pred(Q::one(), z)).collect();
        sel.push(Literal::constant(q(-1, 2)));
        clauses.push(SumClause::new(sel));
        provenance.push(Provenance::Selector { index: i });
    }
    ReducedSentence {
        clauses,
        provenance,
        indicators,
        skolems: m.skolems.clone(),
        signature: sig,
    }
}

/// Min-normal then reduced normal form.
pub fn normalize(s: &Formula, sig: &Signature) -> ReducedSentence {
    to_reduced_normal(&to_min_normal(s, sig))
}

/// Spacing of the value lattice of an integer-fragment sentence: the
/// reciprocal of the least common multiple of all denominators once scalars
/// have been pushed down to atoms.
pub fn epsilon_of(s: &Formula, sig: &Signature) -> Result<Q, NormalError> {
    let mut preds = BTreeMap::new();
    let mut funcs = BTreeMap::new();
    s.collect_symbols(&mut preds, &mut funcs);
    for p in preds.keys() {
        match sig.range(p) {
            None => return Err(NormalError::Undeclared(p.clone())),
            Some(r) if r.sort != Sort::Integer => return Err(NormalError::NotIntegerFragment(p.clone())),
            _ => {}
        }
    }
    let pushed = push_inward(s);
    let d = lcm_denominators(pushed.scalars().iter());
    Ok(Q::new(num_bigint::BigInt::one(), d))
}

/// Whether every predicate of `sig` mentioned in `s` is integer-sorted.
pub fn is_integer_fragment(s: &Formula, sig: &Signature) -> bool {
    epsilon_of(s, sig).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_problem};
    use crate::rational::qi;

    fn sig(src: &str) -> Signature {
        parse_problem(&format!("{src} sentence 0;")).unwrap().signature
    }

    #[test]
    fn skolemizes_with_enclosing_infima() {
        let s = sig("pred P/1 in int[0,1];");
        let f = parse_formula("!y. !z. ?x. P(x)", &s).unwrap();
        let m = to_min_normal(&f, &s);
        assert_eq!(m.to_formula().to_string(), "P(x(y,z))");
        assert_eq!(m.skolems[0].args, vec!["y".to_string(), "z".to_string()]);
    }

    #[test]
    fn de_morgan_and_distribution() {
        let s = sig("pred A/0 in int[0,1]; pred B/0 in int[0,1];");
        let f = parse_formula("-(A v B)", &s).unwrap();
        assert_eq!(to_min_normal(&f, &s).to_formula().to_string(), "-A ^ -B");
        let s = sig("pred p/1 in int[0,1]; pred q/1 in int[0,1]; pred r/1 in int[0,1];");
        let f = parse_formula("(p(x) ^ q(x)) v r(x)", &s).unwrap();
        assert_eq!(to_min_normal(&f, &s).to_formula().to_string(), "(p(x) v r(x)) ^ (q(x) v r(x))");
    }

    #[test]
    fn intervals() {
        let s = sig("pred x/1 in int[0,8]; fun S/1; pred eagle/1 in int[0,1]; fun Stanley/0;");
        let c = as_sum_clause(&parse_formula("x(i) - 2*x(S(i))", &s).unwrap()).unwrap();
        assert_eq!(interval_of(&c, &s), Interval { lo: qi(-16), hi: qi(8) });
        let c = as_sum_clause(&Formula::scalar(qi(-1))).unwrap();
        assert_eq!(interval_of(&c, &s), Interval::point(qi(-1)));
        let c = as_sum_clause(&parse_formula("eagle(Stanley) - 1", &s).unwrap()).unwrap();
        assert_eq!(interval_of(&c, &s), Interval { lo: qi(-1), hi: qi(0) });
    }

    #[test]
    fn reduced_form_indicators() {
        let s = sig("pred p/1 in int[0,1]; pred q/1 in int[0,1];");
        let f = parse_formula("p(x) v q(x) - 1", &s).unwrap();
        let r = normalize(&f, &s);
        let text: Vec<String> = r.clauses.iter().map(|c| c.to_string()).collect();
        assert_eq!(text, vec!["p(x)", "q(x) - z_1_2(x)", "z_1_1(x) + z_1_2(x) - 1/2"]);
        assert_eq!(r.indicators[0].bound, qi(0));
        assert_eq!(r.indicators[1].bound, qi(1));
        let single = normalize(&parse_formula("p(A) - 1", &sig("pred p/1 in int[0,1]; fun A/0;")).unwrap(), &s);
        assert_eq!(single.clauses.len(), 1);
    }

    #[test]
    fn epsilon_cases() {
        let s = sig("pred p/0 in int[0,1]; pred x/1 in int[0,8]; fun S/1; pred r/0 in real[0,1];");
        assert_eq!(epsilon_of(&parse_formula("2*p - 3", &s).unwrap(), &s).unwrap(), qi(1));
        assert_eq!(epsilon_of(&parse_formula("1/2*p + 1/3", &s).unwrap(), &s).unwrap(), q(1, 6));
        assert_eq!(epsilon_of(&parse_formula("-x(S(S(S(i))))", &s).unwrap(), &s).unwrap(), qi(1));
        assert_eq!(epsilon_of(&parse_formula("1/2*(1/2*p)", &s).unwrap(), &s).unwrap(), q(1, 4));
        assert!(epsilon_of(&parse_formula("r", &s).unwrap(), &s).is_err());
    }
}
