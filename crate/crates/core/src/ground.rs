//! Herbrand grounding, ground subproblems, the naive inference loop, and
//! finite grounding of concrete problems.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ast::{Atom, Formula, PredAtom, Range, Signature, Sort, Substitution, SumClause, Term};
use crate::eval::{evaluate_term, EvalError, Model, Valuation};
use crate::exec::Exec;
use crate::milp::{milp_decide, milp_optimize, Constraint, Decision, MilpCertificate, MilpProblem, Optimization, Var};
use crate::normal::{epsilon_of, formula_interval, is_integer_fragment, normalize, ReducedSentence};
use crate::parser::ProblemFile;
use crate::rational::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("instance {index} does not ground clause {clause}")]
    NonGround { index: usize, clause: usize },
    #[error("no clause with id {0}")]
    UnknownClause(usize),
    #[error("predicate `{0}` has no declared range")]
    Undeclared(String),
    #[error("concrete mode needs an objects directive")]
    NoObjects,
    #[error("concrete grounding: {0}")]
    Eval(#[from] EvalError),
    #[error("cut budget exhausted before the optimum was certified (upper bound {0})")]
    Budget(String),
}

// ---------------------------------------------------------------------------
// Herbrand universe
// ---------------------------------------------------------------------------

/// Ground terms over a fixed symbol set, generated level by level in
/// nondecreasing depth.
#[derive(Clone, Debug)]
pub struct HerbrandStream {
    constants: Vec<String>,
    functions: Vec<(String, usize)>,
    terms: Vec<Term>,
    /// `level_end[d]` is the number of terms of depth at most `d`.
    level_end: Vec<usize>,
}

impl HerbrandStream {
    /// Symbols occurring in `clauses`; `nil` stands in when no constant does.
    pub fn from_clauses(clauses: &[SumClause]) -> Self {
        let mut funcs = BTreeMap::new();
        for c in clauses {
            for (_, p) in c.pred_terms() {
                for a in &p.args {
                    a.collect_funcs(&mut funcs);
                }
            }
        }
        Self::from_symbols(&funcs)
    }

    pub fn from_symbols(funcs: &BTreeMap<String, usize>) -> Self {
        let mut constants: Vec<String> = funcs.iter().filter(|(_, &k)| k == 0).map(|(f, _)| f.clone()).collect();
        if constants.is_empty() {
            constants.push(crate::ast::NIL.to_string());
        }
        let functions = funcs.iter().filter(|(_, &k)| k > 0).map(|(f, &k)| (f.clone(), k)).collect();
        let terms: Vec<Term> = constants.iter().map(|c| Term::constant(c.clone())).collect();
        let level_end = vec![terms.len()];
        HerbrandStream { constants, functions, terms, level_end }
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    /// No function symbol of positive arity: the universe is the constants.
    pub fn is_finite(&self) -> bool {
        self.functions.is_empty()
    }

    fn extend_to(&mut self, d: usize) {
        while self.level_end.len() <= d {
            let prev_start = if self.level_end.len() >= 2 { self.level_end[self.level_end.len() - 2] } else { 0 };
            let n = self.terms.len();
            let mut next = Vec::new();
            for (f, k) in &self.functions {
                for_each_tuple(n, *k, prev_start, |idx| {
                    next.push(Term::App(f.clone(), idx.iter().map(|&i| self.terms[i].clone()).collect()));
                });
            }
            self.terms.extend(next);
            self.level_end.push(self.terms.len());
        }
    }

    /// All terms of depth at most `d`.
    pub fn upto(&mut self, d: usize) -> &[Term] {
        self.extend_to(d);
        &self.terms[..self.level_end[d]]
    }

    /// Number of terms of depth at most `d`.
    pub fn count(&mut self, d: usize) -> usize {
        self.upto(d).len()
    }
}

/// Calls `f` on every `k`-tuple of indices below `n` with at least one index
/// at or above `fresh`, in lexicographic order. `k = 0` yields one empty
/// tuple only when `fresh == 0`.
fn for_each_tuple(n: usize, k: usize, fresh: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 {
        if fresh == 0 {
            f(&[]);
        }
        return;
    }
    if n == 0 {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        if idx.iter().any(|&i| i >= fresh) {
            f(&idx);
        }
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Ground terms of depth at most `d` over the sentence's symbols.
pub fn herbrand_terms(s: &ReducedSentence, d: usize) -> Vec<Term> {
    HerbrandStream::from_clauses(&s.clauses).upto(d).to_vec()
}

// ---------------------------------------------------------------------------
// Ground subproblems
// ---------------------------------------------------------------------------

/// A clause id with a ground substitution for its free variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundInstance {
    pub clause: usize,
    pub sub: Substitution,
}

/// Ground clauses over a dictionary of textually distinct atoms, and the
/// induced feasibility problem.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundProblem {
    pub instances: Vec<GroundInstance>,
    pub clauses: Vec<SumClause>,
    pub atoms: Vec<PredAtom>,
    pub milp: MilpProblem,
}

impl GroundProblem {
    pub fn atom_index(&self, a: &PredAtom) -> Option<usize> {
        self.atoms.iter().position(|x| x == a)
    }
}

/// MILP variable for an atom, bounded by its predicate's range.
pub fn atom_var(a: &PredAtom, sig: &Signature) -> Result<Var, GroundError> {
    let r: &Range = sig.range(&a.pred).ok_or_else(|| GroundError::Undeclared(a.pred.clone()))?;
    let (lo, hi) = r.effective();
    Ok(Var::new(a.to_string(), r.sort, lo, hi))
}

/// Builds the MILP whose variables are the distinct atoms of `clauses`, in
/// order of first occurrence, with one `>= 0` row per clause.
pub fn clauses_to_milp(clauses: &[SumClause], sig: &Signature) -> Result<(Vec<PredAtom>, MilpProblem), GroundError> {
    let mut atoms: Vec<PredAtom> = Vec::new();
    let mut index: BTreeMap<PredAtom, usize> = BTreeMap::new();
    for c in clauses {
        for (_, p) in c.pred_terms() {
            if !index.contains_key(&p) {
                index.insert(p.clone(), atoms.len());
                atoms.push(p);
            }
        }
    }
    let vars = atoms.iter().map(|a| atom_var(a, sig)).collect::<Result<Vec<_>, _>>()?;
    let constraints = clauses
        .iter()
        .map(|c| {
            let mut coeffs = vec![Q::zero(); atoms.len()];
            for (k, p) in c.pred_terms() {
                coeffs[index[&p]] += k;
            }
            Constraint::new(coeffs, c.constant())
        })
        .collect();
    let milp = MilpProblem { vars, constraints };
    Ok((atoms, milp))
}

/// Instantiates the given clauses and phrases them as one MILP.
pub fn ground_subproblem(s: &ReducedSentence, instances: &[GroundInstance]) -> Result<GroundProblem, GroundError> {
    let mut clauses = Vec::with_capacity(instances.len());
    for (index, inst) in instances.iter().enumerate() {
        let c = s.clauses.get(inst.clause).ok_or(GroundError::UnknownClause(inst.clause))?;
        let g = c.substitute(&inst.sub);
        if !g.is_ground() {
            return Err(GroundError::NonGround { index, clause: inst.clause });
        }
        clauses.push(g);
    }
    let (atoms, milp) = clauses_to_milp(&clauses, &s.signature)?;
    Ok(GroundProblem {
        instances: instances.to_vec(),
        clauses,
        atoms,
        milp,
    })
}

/// Ground instances of `clauses` in canonical order: by the largest term
/// depth used, then clause id, then the term tuple in stream order.
#[derive(Clone, Debug)]
pub struct InstanceStream {
    vars: Vec<Vec<String>>,
    stream: HerbrandStream,
    instances: Vec<GroundInstance>,
    depth_end: Vec<usize>,
}

impl InstanceStream {
    pub fn new(clauses: &[SumClause]) -> Self {
        InstanceStream {
            vars: clauses.iter().map(SumClause::free_vars_ordered).collect(),
            stream: HerbrandStream::from_clauses(clauses),
            instances: Vec::new(),
            depth_end: Vec::new(),
        }
    }

    /// Instances using terms of depth at most `d`.
    pub fn upto(&mut self, d: usize) -> &[GroundInstance] {
        while self.depth_end.len() <= d {
            let level = self.depth_end.len();
            let fresh = if level == 0 { 0 } else { self.stream.count(level - 1) };
            let terms = self.stream.upto(level).to_vec();
            for (clause, vs) in self.vars.iter().enumerate() {
                for_each_tuple(terms.len(), vs.len(), fresh, |idx| {
                    let sub = Substitution::from_pairs(vs.iter().cloned().zip(idx.iter().map(|&i| terms[i].clone())))
                        .expect("ground bindings");
                    self.instances.push(GroundInstance { clause, sub });
                });
            }
            self.depth_end.push(self.instances.len());
        }
        &self.instances[..self.depth_end[d]]
    }

    pub fn herbrand(&mut self) -> &mut HerbrandStream {
        &mut self.stream
    }
}

// ---------------------------------------------------------------------------
// Naive inference
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NaiveConfig {
    pub max_depth: usize,
    /// Subproblems decided before giving up.
    pub max_subproblems: usize,
    /// Cuts allowed per subproblem.
    pub cut_budget: usize,
    /// Largest instance set considered.
    pub max_instances: usize,
    pub exec: Exec,
}

impl Default for NaiveConfig {
    fn default() -> Self {
        NaiveConfig {
            max_depth: 3,
            max_subproblems: 200,
            cut_budget: 200,
            max_instances: 2000,
            exec: Exec::default(),
        }
    }
}

/// An infeasible ground subproblem with its replayable cut certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveCertificate {
    pub depth: usize,
    pub problem: GroundProblem,
    pub certificate: MilpCertificate,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NaiveOutcome {
    Infeasible(NaiveCertificate),
    BudgetExhausted { examined: usize },
}

/// Searches instance prefixes in canonical order for an infeasible ground
/// subproblem. Each depth is decided on its full instance set first; when
/// that is infeasible, the shortest infeasible prefix is located by probing
/// evenly spaced prefix lengths in rounds.
pub fn naive_infer(s: &ReducedSentence, cfg: &NaiveConfig) -> NaiveOutcome {
    const PROBES: usize = 8;
    let mut stream = InstanceStream::new(&s.clauses);
    let mut examined = 0usize;
    let mut prev_len = 0usize;
    let decide = |k: usize, all: &[GroundInstance]| -> Option<(GroundProblem, MilpCertificate)> {
        let gp = ground_subproblem(s, &all[..k]).ok()?;
        match milp_decide(&gp.milp, cfg.cut_budget) {
            Decision::Infeasible(c) => Some((gp, c)),
            _ => None,
        }
    };
    for d in 0..=cfg.max_depth {
        let all = stream.upto(d).to_vec();
        if all.len() > cfg.max_instances {
            break;
        }
        if d > 0 && all.len() == prev_len {
            break;
        }
        if examined >= cfg.max_subproblems {
            break;
        }
        examined += 1;
        let Some(mut best) = decide(all.len(), &all) else {
            prev_len = all.len();
            continue;
        };
        let (mut lo, mut hi) = (prev_len, all.len());
        while hi > lo + 1 && examined < cfg.max_subproblems {
            let gap = hi - lo - 1;
            let probes: Vec<usize> = if gap <= PROBES {
                (lo + 1..hi).collect()
            } else {
                let mut v: Vec<usize> = (1..=PROBES).map(|j| lo + (gap * j) / (PROBES + 1) + 1).collect();
                v.dedup();
                v
            };
            let room = cfg.max_subproblems - examined;
            let probes: Vec<usize> = probes.into_iter().take(room).collect();
            examined += probes.len();
            let results = cfg.exec.map(&probes, |&k| decide(k, &all));
            match results.iter().position(Option::is_some) {
                Some(pos) => {
                    if pos > 0 {
                        lo = probes[pos - 1];
                    }
                    hi = probes[pos];
                    best = results.into_iter().nth(pos).flatten().expect("probe result");
                }
                None => lo = *probes.last().expect("nonempty probes"),
            }
        }
        let (problem, certificate) = shrink_to_support(s, best, cfg.cut_budget);
        return NaiveOutcome::Infeasible(NaiveCertificate { depth: d, problem, certificate });
    }
    NaiveOutcome::BudgetExhausted { examined }
}

/// Restricts an infeasible subproblem to the instances its certificate
/// actually uses, keeping the smaller one when it is still refuted.
fn shrink_to_support(
    s: &ReducedSentence,
    (gp, cert): (GroundProblem, MilpCertificate),
    budget: usize,
) -> (GroundProblem, MilpCertificate) {
    let n = gp.instances.len();
    let used: Vec<GroundInstance> = (0..n)
        .filter(|&i| !cert.farkas.mu[i].is_zero() || cert.cuts.iter().any(|c| !c.lambda[i].is_zero()))
        .map(|i| gp.instances[i].clone())
        .collect();
    if used.len() == n {
        return (gp, cert);
    }
    match ground_subproblem(s, &used).map(|g| {
        let d = milp_decide(&g.milp, budget);
        (g, d)
    }) {
        Ok((g, Decision::Infeasible(c))) => (g, c),
        _ => (gp, cert),
    }
}

// ---------------------------------------------------------------------------
// Concrete problems
// ---------------------------------------------------------------------------

fn concrete_model(p: &ProblemFile) -> Result<Model, GroundError> {
    let objects = p.objects.clone().ok_or(GroundError::NoObjects)?;
    if objects.is_empty() {
        return Err(GroundError::NoObjects);
    }
    let mut m = Model::new(objects);
    m.funcs = p.function_table.clone();
    Ok(m)
}

fn expand(f: &Formula, m: &Model, env: &mut Valuation) -> Result<Formula, GroundError> {
    Ok(match f {
        Formula::Atom(Atom::Scalar(_)) => f.clone(),
        Formula::Atom(Atom::Pred(p)) => {
            let args = p
                .args
                .iter()
                .map(|t| evaluate_term(t, m, env).map(Term::constant))
                .collect::<Result<Vec<_>, _>>()?;
            Formula::Atom(Atom::Pred(PredAtom::new(p.pred.clone(), args)))
        }
        Formula::Neg(a) => expand(a, m, env)?.neg(),
        Formula::Scale(c, a) => Formula::scale(c.clone(), expand(a, m, env)?),
        Formula::Add(a, b) => Formula::add(expand(a, m, env)?, expand(b, m, env)?),
        Formula::Sub(a, b) => Formula::sub(expand(a, m, env)?, expand(b, m, env)?),
        Formula::Min(a, b) => Formula::min(expand(a, m, env)?, expand(b, m, env)?),
        Formula::Max(a, b) => Formula::max(expand(a, m, env)?, expand(b, m, env)?),
        Formula::Inf(v, body) | Formula::Sup(v, body) => {
            let saved = env.get(v).cloned();
            let mut parts = Vec::with_capacity(m.objects.len());
            for o in &m.objects {
                env.insert(v.clone(), o.clone());
                parts.push(expand(body, m, env)?);
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            let out = if matches!(f, Formula::Inf(..)) {
                Formula::min_all(parts)
            } else {
                Formula::max_all(parts)
            };
            out.expect("nonempty domain")
        }
    })
}

/// Expands quantifiers over the declared objects and evaluates every term
/// through the function table. The result is quantifier-free and ground.
pub fn concrete_expand(p: &ProblemFile) -> Result<Formula, GroundError> {
    let m = concrete_model(p)?;
    expand(&p.sentence.clone().close_inf(), &m, &mut Valuation::new())
}

fn ground_all(r: &ReducedSentence) -> Result<GroundProblem, GroundError> {
    let instances: Vec<GroundInstance> = (0..r.clauses.len())
        .map(|clause| GroundInstance { clause, sub: Substitution::empty() })
        .collect();
    ground_subproblem(r, &instances)
}

/// The concrete sentence as one MILP, feasible iff its value is `>= 0`.
pub fn concrete_ground(p: &ProblemFile) -> Result<GroundProblem, GroundError> {
    let g = concrete_expand(p)?;
    ground_all(&normalize(&g, &p.signature))
}

/// Epigraph form of a concrete sentence: maximizing `objective · x` gives
/// the sentence value.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteProblem {
    pub problem: GroundProblem,
    pub objective: Vec<Q>,
    /// Name of the epigraph predicate.
    pub epigraph: String,
}

fn fresh_pred(sig: &Signature, stem: &str) -> String {
    std::iter::once(stem.to_string())
        .chain((1..).map(|k| format!("{stem}{k}")))
        .find(|n| !sig.preds.contains_key(n) && !sig.funcs.contains_key(n))
        .expect("unbounded supply")
}

/// Adds a fresh zero-argument predicate `z` and returns `s - unit * z` with
/// the extended signature and `unit`. In the integer fragment `z` is
/// integer-sorted and counts multiples of the value spacing; otherwise it
/// is real-sorted with unit 1.
pub fn epigraph(s: &Formula, sig: &Signature) -> (Formula, Signature, String, Q) {
    let iv = formula_interval(s, sig);
    let name = fresh_pred(sig, "z");
    let mut sig2 = sig.clone();
    let unit = if is_integer_fragment(s, sig) {
        let eps = epsilon_of(s, sig).expect("integer fragment");
        let lo = (&iv.lo / &eps).ceil();
        let hi = (&iv.hi / &eps).floor();
        sig2.declare_pred(name.clone(), 0, Range::new(lo, hi, Sort::Integer)).expect("fresh predicate");
        eps
    } else {
        sig2.declare_pred(name.clone(), 0, Range::new(iv.lo.clone(), iv.hi.clone(), Sort::Real))
            .expect("fresh predicate");
        Q::one()
    };
    let z = Formula::scale(unit.clone(), Formula::pred(name.clone(), Vec::new()));
    (Formula::sub(s.clone(), z), sig2, name, unit)
}

pub fn concrete_epigraph(p: &ProblemFile) -> Result<ConcreteProblem, GroundError> {
    let g = concrete_expand(p)?;
    let (f, sig, name, unit) = epigraph(&g, &p.signature);
    let problem = ground_all(&normalize(&f, &sig))?;
    let z = PredAtom::new(name.clone(), Vec::new());
    let mut objective = vec![Q::zero(); problem.atoms.len()];
    if let Some(k) = problem.atom_index(&z) {
        objective[k] = unit;
    }
    Ok(ConcreteProblem { problem, objective, epigraph: name })
}

/// Optimal value of a concrete sentence with an optimal assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteValue {
    pub value: Q,
    /// Values of the sentence's atoms (indicators and the epigraph variable
    /// excluded), in dictionary order.
    pub assignment: Vec<(PredAtom, Q)>,
}

pub fn concrete_value(p: &ProblemFile, budget: usize) -> Result<ConcreteValue, GroundError> {
    let c = concrete_epigraph(p)?;
    let value_of_const = || {
        // No atoms at all: the sentence is a constant.
        crate::eval::sentence_value(&concrete_expand(p)?, &concrete_model(p)?).map_err(GroundError::from)
    };
    if c.problem.atoms.is_empty() {
        return Ok(ConcreteValue { value: value_of_const()?, assignment: Vec::new() });
    }
    match milp_optimize(&c.problem.milp, &c.objective, budget) {
        Optimization::Optimal { value, x } => {
            let assignment = c
                .problem
                .atoms
                .iter()
                .zip(x)
                .filter(|(a, _)| p.signature.preds.contains_key(&a.pred) && a.pred != c.epigraph)
                .map(|(a, v)| (a.clone(), v))
                .collect();
            Ok(ConcreteValue { value, assignment })
        }
        Optimization::Infeasible => unreachable!("the epigraph variable can always reach its lower bound"),
        Optimization::Bounds { upper } => Err(GroundError::Budget(crate::rational::fmt_q(&upper))),
    }
}
