//! Seeded generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use fop_core::ast::{Formula, PredAtom, Range, Signature, Sort, Term};
use fop_core::milp::{Constraint, MilpProblem, Var};
use fop_core::parser::FolFormula;
use fop_core::rational::{q, qi};
use fop_core::Q;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// First-order logic
// ---------------------------------------------------------------------------

pub struct FolCase {
    pub formula: FolFormula,
    pub signature: Signature,
    pub preds: Vec<String>,
    pub consts: Vec<String>,
}

fn fol_gen(r: &mut ChaCha8Rng, depth: usize, bound: &mut Vec<String>, preds: &[String], consts: &[String]) -> FolFormula {
    let leaf = depth == 0 || r.gen_bool(0.3);
    if leaf {
        let terms: Vec<Term> = bound
            .iter()
            .map(|v| Term::var(v.clone()))
            .chain(consts.iter().map(|c| Term::constant(c.clone())))
            .collect();
        if terms.is_empty() || r.gen_bool(0.05) {
            return if r.gen_bool(0.5) { FolFormula::True } else { FolFormula::False };
        }
        let p = preds.choose(r).unwrap();
        let t = terms.choose(r).unwrap().clone();
        return FolFormula::atom(p, vec![t]);
    }
    match r.gen_range(0..6) {
        0 => fol_gen(r, depth - 1, bound, preds, consts).not(),
        1 => FolFormula::and(fol_gen(r, depth - 1, bound, preds, consts), fol_gen(r, depth - 1, bound, preds, consts)),
        2 => FolFormula::or(fol_gen(r, depth - 1, bound, preds, consts), fol_gen(r, depth - 1, bound, preds, consts)),
        3 => FolFormula::implies(fol_gen(r, depth - 1, bound, preds, consts), fol_gen(r, depth - 1, bound, preds, consts)),
        k => {
            let v = ["x", "y", "z"][r.gen_range(0..3)].to_string();
            bound.push(v.clone());
            let body = fol_gen(r, depth - 1, bound, preds, consts);
            bound.pop();
            if k == 4 {
                FolFormula::forall(&v, body)
            } else {
                FolFormula::exists(&v, body)
            }
        }
    }
}

/// A closed sentence over at most two unary predicates and two constants.
pub fn random_fol(r: &mut ChaCha8Rng) -> FolCase {
    let preds: Vec<String> = ["P", "Q"][..r.gen_range(1..=2)].iter().map(|s| s.to_string()).collect();
    let consts: Vec<String> = ["A", "B"][..r.gen_range(0..=2)].iter().map(|s| s.to_string()).collect();
    let mut sig = Signature::new();
    for p in &preds {
        sig.declare_pred(p.clone(), 1, Range::boolean()).unwrap();
    }
    for c in &consts {
        sig.declare_func(c.clone(), 0).unwrap();
    }
    let formula = fol_gen(r, 4, &mut Vec::new(), &preds, &consts);
    FolCase { formula, signature: sig, preds, consts }
}

fn fol_eval(
    f: &FolFormula,
    n: usize,
    consts: &[(String, usize)],
    tables: &[(String, Vec<bool>)],
    env: &mut Vec<(String, usize)>,
) -> bool {
    let obj = |t: &Term, env: &Vec<(String, usize)>| -> usize {
        match t {
            Term::Var(v) => env.iter().rev().find(|(w, _)| w == v).unwrap().1,
            Term::App(c, _) => consts.iter().find(|(d, _)| d == c).unwrap().1,
        }
    };
    match f {
        FolFormula::True => true,
        FolFormula::False => false,
        FolFormula::Atom(a) => {
            let o = obj(&a.args[0], env);
            tables.iter().find(|(p, _)| *p == a.pred).unwrap().1[o]
        }
        FolFormula::Not(a) => !fol_eval(a, n, consts, tables, env),
        FolFormula::And(a, b) => fol_eval(a, n, consts, tables, env) && fol_eval(b, n, consts, tables, env),
        FolFormula::Or(a, b) => fol_eval(a, n, consts, tables, env) || fol_eval(b, n, consts, tables, env),
        FolFormula::Implies(a, b) => !fol_eval(a, n, consts, tables, env) || fol_eval(b, n, consts, tables, env),
        FolFormula::Forall(v, b) | FolFormula::Exists(v, b) => {
            let all = matches!(f, FolFormula::Forall(..));
            let mut acc = all;
            for o in 0..n {
                env.push((v.clone(), o));
                let x = fol_eval(b, n, consts, tables, env);
                env.pop();
                if all {
                    acc &= x;
                } else {
                    acc |= x;
                }
            }
            acc
        }
    }
}

/// Whether some interpretation with exactly `n` objects satisfies the case.
pub fn fol_satisfiable(c: &FolCase, n: usize) -> bool {
    let nc = c.consts.len();
    let np = c.preds.len();
    let const_codes = n.pow(nc as u32);
    let table_codes = 1usize << (n * np);
    for cc in 0..const_codes {
        let consts: Vec<(String, usize)> =
            c.consts.iter().enumerate().map(|(i, s)| (s.clone(), (cc / n.pow(i as u32)) % n)).collect();
        for tc in 0..table_codes {
            let tables: Vec<(String, Vec<bool>)> = c
                .preds
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), (0..n).map(|o| tc >> (i * n + o) & 1 == 1).collect()))
                .collect();
            if fol_eval(&c.formula, n, &consts, &tables, &mut Vec::new()) {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// FOP sentences
// ---------------------------------------------------------------------------

/// `p/1 int[0,1]`, `q/1 int[0,2]`, `r/0 int[-1,1]`, constant `A`, and
/// optionally `f/1`.
pub fn fop_signature(with_function: bool) -> Signature {
    let mut s = Signature::new();
    s.declare_pred("p", 1, Range::new(qi(0), qi(1), Sort::Integer)).unwrap();
    s.declare_pred("q", 1, Range::new(qi(0), qi(2), Sort::Integer)).unwrap();
    s.declare_pred("r", 0, Range::new(qi(-1), qi(1), Sort::Integer)).unwrap();
    s.declare_func("A", 0).unwrap();
    if with_function {
        s.declare_func("f", 1).unwrap();
    }
    s
}

fn scalar(r: &mut ChaCha8Rng, rational: bool) -> Q {
    if rational && r.gen_bool(0.5) {
        let d = [2, 3, 4][r.gen_range(0..3)];
        q(r.gen_range(-4..=4), d)
    } else {
        qi(r.gen_range(-2..=2))
    }
}

fn fop_term(r: &mut ChaCha8Rng, sig: &Signature, bound: &[String]) -> Term {
    let mut vars: Vec<String> = bound.to_vec();
    vars.push("x".into());
    let base = match r.gen_range(0..4) {
        0 => Term::constant("A"),
        _ => Term::var(vars.choose(r).unwrap().clone()),
    };
    if sig.funcs.contains_key("f") && r.gen_bool(0.25) {
        Term::app("f", vec![base])
    } else {
        base
    }
}

fn fop_gen(r: &mut ChaCha8Rng, sig: &Signature, depth: usize, bound: &mut Vec<String>, quants: usize, rational: bool) -> Formula {
    if depth == 0 || r.gen_bool(0.25) {
        return match r.gen_range(0..10) {
            0..=1 => Formula::scalar(scalar(r, rational)),
            2 => Formula::pred("r", vec![]),
            3..=6 => Formula::pred("p", vec![fop_term(r, sig, bound)]),
            _ => Formula::pred("q", vec![fop_term(r, sig, bound)]),
        };
    }
    let sub = |r: &mut ChaCha8Rng, bound: &mut Vec<String>| fop_gen(r, sig, depth - 1, bound, quants, rational);
    match r.gen_range(0..9) {
        0 => sub(r, bound).neg(),
        1 => {
            let mut c = scalar(r, rational);
            if c == qi(0) {
                c = qi(2);
            }
            Formula::scale(c, sub(r, bound))
        }
        2 => Formula::add(sub(r, bound), sub(r, bound)),
        3 => Formula::sub(sub(r, bound), sub(r, bound)),
        4 | 5 => Formula::min(sub(r, bound), sub(r, bound)),
        6 => Formula::max(sub(r, bound), sub(r, bound)),
        k if quants < 2 => {
            let v = ["u", "w"][quants].to_string();
            bound.push(v.clone());
            let body = fop_gen(r, sig, depth - 1, bound, quants + 1, rational);
            bound.pop();
            if k == 7 {
                Formula::inf(v, body)
            } else {
                Formula::sup(v, body)
            }
        }
        _ => Formula::add(sub(r, bound), sub(r, bound)),
    }
}

/// A random integer-fragment sentence; `rational` admits fractional scalars.
pub fn random_fop(r: &mut ChaCha8Rng, sig: &Signature, rational: bool) -> Formula {
    fop_gen(r, sig, 3, &mut Vec::new(), 0, rational)
}

// ---------------------------------------------------------------------------
// MILPs
// ---------------------------------------------------------------------------

/// At most three integer variables with ranges inside `[0, 8]` and up to four
/// constraints with small integer or half-integer coefficients.
pub fn random_milp(r: &mut ChaCha8Rng) -> MilpProblem {
    let n = r.gen_range(1..=3);
    let vars: Vec<Var> = (0..n)
        .map(|k| {
            let lo = r.gen_range(0..=4);
            let hi = r.gen_range(lo..=8);
            Var::new(format!("x{}", k + 1), Sort::Integer, qi(lo), qi(hi))
        })
        .collect();
    let m = r.gen_range(1..=4);
    let constraints = (0..m)
        .map(|_| {
            let coeffs = (0..n)
                .map(|_| if r.gen_bool(0.25) { q(r.gen_range(-5..=5), 2) } else { qi(r.gen_range(-3..=3)) })
                .collect();
            let constant = if r.gen_bool(0.3) { q(r.gen_range(-17..=17), 2) } else { qi(r.gen_range(-8..=8)) };
            Constraint::new(coeffs, constant)
        })
        .collect();
    MilpProblem::new(vars, constraints).unwrap()
}

/// Every integer point of the box, feasible or not.
pub fn box_points(p: &MilpProblem) -> Vec<Vec<Q>> {
    let mut out = vec![Vec::new()];
    for v in &p.vars {
        let lo = v.lo.to_integer().try_into().unwrap_or(0i64);
        let hi = v.hi.to_integer().try_into().unwrap_or(0i64);
        let mut next = Vec::new();
        for pt in &out {
            for k in lo..=hi {
                let mut x: Vec<Q> = pt.clone();
                x.push(qi(k));
                next.push(x);
            }
        }
        out = next;
    }
    out
}

pub fn feasible_points(p: &MilpProblem) -> Vec<Vec<Q>> {
    box_points(p).into_iter().filter(|x| p.is_feasible_point(x)).collect()
}

// ---------------------------------------------------------------------------
// Refutands for naive inference
// ---------------------------------------------------------------------------

/// A conjunction of small sum-clauses over `p/1 int[0,1]`, `q/1 int[0,2]`,
/// constant `A` and function `f/1`.
pub fn random_clause_set(r: &mut ChaCha8Rng) -> (Formula, Signature) {
    let sig = fop_signature(true);
    let atoms = |r: &mut ChaCha8Rng| -> PredAtom {
        let x = Term::var("x");
        let a = Term::constant("A");
        let fx = Term::app("f", vec![x.clone()]);
        let fa = Term::app("f", vec![a.clone()]);
        let t = [x, a, fx, fa].choose(r).unwrap().clone();
        PredAtom::new(if r.gen_bool(0.6) { "p" } else { "q" }, vec![t])
    };
    let k = r.gen_range(2..=4);
    let mut clauses = Vec::new();
    for _ in 0..k {
        let mut f = Formula::scalar([q(-1, 2), qi(-1), qi(0), q(1, 2), qi(1), q(3, 2)][r.gen_range(0..6)].clone());
        for _ in 0..r.gen_range(1..=2) {
            let c = [qi(-2), qi(-1), qi(1), qi(2)][r.gen_range(0..4)].clone();
            f = Formula::add(f, Formula::scale(c, Formula::Atom(fop_core::ast::Atom::Pred(atoms(r)))));
        }
        clauses.push(f);
    }
    (Formula::min_all(clauses).unwrap(), sig)
}
