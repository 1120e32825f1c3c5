//! Lifted Gomory cuts, refutation search, entailment, value bounds, and
//! replayable proof traces.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ast::{Formula, Literal, NameSource, PredAtom, Signature, Substitution, SumClause, Term};
use crate::eval::{brute_force_value_upto, BruteForceConfig};
use crate::exec::Exec;
use crate::ground::{
    clauses_to_milp, epigraph, ground_subproblem, GroundError, GroundInstance, GroundProblem, HerbrandStream,
    InstanceStream, NaiveCertificate,
};
use crate::milp::{
    eliminate_slacks, gomory_cut, milp_optimize, round_cut, separating_cut, simplex_solve, to_equality_form, CutKind,
    Farkas, LpOutcome, MilpError, MilpProblem, Optimization, Tableau,
};
use crate::normal::{epsilon_of, formula_interval, normalize, NormalError, Provenance, ReducedSentence};
use crate::parser::{parse_term, ParseError};
use crate::rational::{serde_q, Q};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftedError {
    #[error("the combination has an integral right-hand side; no cut")]
    NoCut,
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("pick {index}: {reason}")]
    BadPick { index: usize, reason: String },
    #[error("variable `{0}` is shared between picks")]
    NotApart(String),
    #[error("predicate `{0}` is undeclared")]
    Undeclared(String),
    #[error("{0}; use epsilon entailment for mixed sentences")]
    MixedFragment(NormalError),
    #[error("trace term: {0}")]
    Parse(String),
}

impl From<ParseError> for LiftedError {
    fn from(e: ParseError) -> Self {
        LiftedError::Parse(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Cut requests
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One row of a cut request. `vars` renames the clause's free variables, in
/// order of first occurrence, so copies are standardized apart explicitly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Pick {
    Clause { clause: usize, vars: Vec<String> },
    Implicit { pred: String, side: Side, vars: Vec<String> },
}

impl Pick {
    pub fn vars(&self) -> &[String] {
        match self {
            Pick::Clause { vars, .. } | Pick::Implicit { vars, .. } => vars,
        }
    }
}

/// Picks, a substitution over their variables, row multipliers and a
/// per-row slack weakening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutRequest {
    pub picks: Vec<Pick>,
    pub substitution: Substitution,
    pub lambda: Vec<Q>,
    pub weakening: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedCut {
    pub clause: SumClause,
    pub kind: CutKind,
    pub request: CutRequest,
}

/// `p(n) - lo` or `hi - p(n)` over fresh argument variables.
pub fn implicit_clause(sig: &Signature, pred: &str, side: Side) -> Result<SumClause, LiftedError> {
    let decl = sig.pred(pred).ok_or_else(|| LiftedError::Undeclared(pred.to_string()))?;
    let args: Vec<Term> = if decl.arity == 1 {
        vec![Term::var("n")]
    } else {
        (1..=decl.arity).map(|k| Term::var(format!("n{k}"))).collect()
    };
    let (lo, hi) = decl.range.effective();
    let atom = PredAtom::new(pred, args);
    Ok(match side {
        Side::Lower => SumClause::new(vec![Literal::pred(Q::from_integer(1.into()), atom), Literal::constant(-lo)]).simplified(),
        Side::Upper => SumClause::new(vec![Literal::constant(hi), Literal::pred(Q::from_integer((-1).into()), atom)]),
    })
}

/// The picked clauses, renamed to their request variables and instantiated.
fn instantiate_picks(s: &ReducedSentence, req: &CutRequest) -> Result<Vec<SumClause>, LiftedError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(req.picks.len());
    for (index, pick) in req.picks.iter().enumerate() {
        let base = match pick {
            Pick::Clause { clause, .. } => s
                .clauses
                .get(*clause)
                .cloned()
                .ok_or_else(|| LiftedError::BadPick { index, reason: format!("no clause {clause}") })?,
            Pick::Implicit { pred, side, .. } => implicit_clause(&s.signature, pred, *side)?,
        };
        let fv = base.free_vars_ordered();
        let vars = pick.vars();
        if fv.len() != vars.len() {
            return Err(LiftedError::BadPick {
                index,
                reason: format!("{} variables given, clause has {}", vars.len(), fv.len()),
            });
        }
        for v in vars {
            if !seen.insert(v.clone()) {
                return Err(LiftedError::NotApart(v.clone()));
            }
        }
        let map: BTreeMap<String, String> = fv.into_iter().zip(vars.iter().cloned()).collect();
        out.push(base.rename(&map).substitute(&req.substitution));
    }
    Ok(out)
}

fn clause_vars(clauses: &[SumClause]) -> BTreeSet<String> {
    clauses.iter().flat_map(|c| c.free_vars_ordered()).collect()
}

/// Request multipliers act on clauses as written; the tableau may have
/// scaled a row to integer coefficients, so divide that scale back out.
fn scaled_lambda(t: &Tableau, lambda: &[Q]) -> Vec<Q> {
    lambda.iter().zip(&t.scale).map(|(l, k)| l / k).collect()
}

/// Multipliers over clauses as written from multipliers over tableau rows.
fn unscaled_lambda(t: &Tableau, lambda: &[Q]) -> Vec<Q> {
    lambda.iter().zip(&t.scale).map(|(l, k)| l * k).collect()
}

/// Applies the lifted Gomory rule: one variable per textually distinct atom
/// of the instantiated picks, equality form, the Gomory cut of `λ`, slack
/// elimination with the weakening, rounding, and finally renaming the
/// result's variables apart from the sentence.
pub fn lifted_cut(s: &ReducedSentence, req: &CutRequest) -> Result<LiftedCut, LiftedError> {
    let picked = instantiate_picks(s, req)?;
    let (atoms, p) = clauses_to_milp(&picked, &s.signature)?;
    let t = to_equality_form(&p);
    let cut = gomory_cut(&t, &scaled_lambda(&t, &req.lambda))?.ok_or(LiftedError::NoCut)?;
    let kind = cut.kind;
    let c = eliminate_slacks(&cut, &t, &req.weakening)?;
    let sorts: Vec<_> = p.vars.iter().map(|v| v.sort).collect();
    let c = round_cut(&c, &sorts);
    let clause = SumClause::from_terms(
        c.coeffs.iter().zip(&atoms).filter(|(a, _)| !a.is_zero()).map(|(a, x)| (a.clone(), x.clone())),
        c.constant,
    )
    .simplified();
    let mut names = NameSource::new();
    names.reserve(clause_vars(&s.clauses));
    let map: BTreeMap<String, String> =
        clause.free_vars_ordered().into_iter().map(|v| (v.clone(), names.fresh(&v))).collect();
    Ok(LiftedCut { clause: clause.rename(&map), kind, request: req.clone() })
}

// ---------------------------------------------------------------------------
// Unification
// ---------------------------------------------------------------------------

fn walk(t: &Term, b: &BTreeMap<String, Term>) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match b.get(v) {
            Some(n) => cur = n.clone(),
            None => break,
        }
    }
    cur
}

fn occurs(v: &str, t: &Term, b: &BTreeMap<String, Term>) -> bool {
    match walk(t, b) {
        Term::Var(w) => w == v,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a, b)),
    }
}

fn unify(x: &Term, y: &Term, b: &mut BTreeMap<String, Term>) -> bool {
    let (x, y) = (walk(x, b), walk(y, b));
    match (&x, &y) {
        (Term::Var(v), Term::Var(w)) if v == w => true,
        (Term::Var(v), t) | (t, Term::Var(v)) => {
            if occurs(v, t, b) {
                return false;
            }
            b.insert(v.clone(), t.clone());
            true
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, c)| unify(a, c, b))
        }
    }
}

fn resolve(t: &Term, b: &BTreeMap<String, Term>) -> Term {
    match walk(t, b) {
        Term::Var(v) => Term::Var(v),
        Term::App(f, args) => Term::App(f, args.iter().map(|a| resolve(a, b)).collect()),
    }
}

/// Most general unifier of the atom pairs, or `None`.
pub fn unify_atoms(pairs: &[(PredAtom, PredAtom)]) -> Option<Substitution> {
    let mut b = BTreeMap::new();
    for (p, q) in pairs {
        if p.pred != q.pred || p.args.len() != q.args.len() {
            return None;
        }
        for (x, y) in p.args.iter().zip(&q.args) {
            if !unify(x, y, &mut b) {
                return None;
            }
        }
    }
    let keys: Vec<String> = b.keys().cloned().collect();
    let resolved: BTreeMap<String, Term> = keys
        .into_iter()
        .filter_map(|k| {
            let t = resolve(&Term::Var(k.clone()), &b);
            (t != Term::Var(k.clone())).then_some((k, t))
        })
        .collect();
    Substitution::new(resolved).ok()
}

/// A cut request over a ground subproblem's rows: constraint rows become
/// clause picks, upper-bound rows become implicit picks, and the ground
/// bindings become the substitution.
fn ground_request(
    s: &ReducedSentence,
    gp: &GroundProblem,
    lambda: &[Q],
    names: &mut NameSource,
) -> (CutRequest, Vec<SumClause>, BTreeMap<String, Term>) {
    let m = gp.instances.len();
    let mut picks = Vec::new();
    let mut lam = Vec::new();
    let mut general = Vec::new();
    let mut ground = BTreeMap::new();
    for (row, w) in lambda.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        if row < m {
            let inst = &gp.instances[row];
            let c = &s.clauses[inst.clause];
            let fv = c.free_vars_ordered();
            let vars: Vec<String> = fv.iter().map(|v| names.fresh(v)).collect();
            for (v, n) in fv.iter().zip(&vars) {
                ground.insert(n.clone(), inst.sub.get(v).cloned().expect("ground instance"));
            }
            let map: BTreeMap<String, String> = fv.into_iter().zip(vars.iter().cloned()).collect();
            general.push(c.rename(&map));
            picks.push(Pick::Clause { clause: inst.clause, vars });
        } else {
            let atom = &gp.atoms[row - m];
            let vars: Vec<String> = atom.args.iter().map(|_| names.fresh("n")).collect();
            for (n, t) in vars.iter().zip(&atom.args) {
                ground.insert(n.clone(), t.clone());
            }
            let args = vars.iter().map(|v| Term::var(v.clone())).collect();
            general.push(SumClause::new(vec![Literal::pred(-Q::from_integer(1.into()), PredAtom::new(atom.pred.clone(), args))]));
            picks.push(Pick::Implicit { pred: atom.pred.clone(), side: Side::Upper, vars });
        }
        lam.push(w.clone());
    }
    let req = CutRequest {
        picks,
        substitution: Substitution::from_pairs(ground.clone()).expect("ground bindings"),
        lambda: lam,
        weakening: Vec::new(),
    };
    (req, general, ground)
}

/// Generalizes a ground request: the substitution becomes the most general
/// one that still identifies exactly the atoms the ground one identifies.
fn generalize(req: &CutRequest, general: &[SumClause], ground: &BTreeMap<String, Term>) -> CutRequest {
    let gsub = Substitution::from_pairs(ground.clone()).expect("ground bindings");
    let mut by_ground: BTreeMap<PredAtom, Vec<PredAtom>> = BTreeMap::new();
    for c in general {
        for (_, a) in c.pred_terms() {
            by_ground.entry(a.substitute(&gsub)).or_default().push(a);
        }
    }
    let mut pairs = Vec::new();
    for group in by_ground.values() {
        for a in &group[1..] {
            pairs.push((group[0].clone(), a.clone()));
        }
    }
    match unify_atoms(&pairs) {
        Some(u) => CutRequest { substitution: u, ..req.clone() },
        None => req.clone(),
    }
}

// ---------------------------------------------------------------------------
// Refutation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RefuteConfig {
    pub max_depth: usize,
    pub cut_budget: usize,
    pub max_instances: usize,
    pub exec: Exec,
}

impl Default for RefuteConfig {
    fn default() -> Self {
        RefuteConfig { max_depth: 6, cut_budget: 200, max_instances: 4000, exec: Exec::default() }
    }
}

/// A completed refutation before serialization.
#[derive(Clone, Debug, PartialEq)]
pub struct Refutation {
    pub steps: Vec<LiftedCut>,
    pub grounding: Vec<GroundInstance>,
    pub farkas: Farkas,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RefuteOutcome {
    Proved(Refutation),
    /// `saturated` means the Herbrand universe is finite and its complete
    /// grounding is feasible, so no refutation exists.
    BudgetExhausted { saturated: bool },
}

/// Terminal contradiction restricted to the rows its certificate uses.
fn terminal(cur: &ReducedSentence, gp: &GroundProblem, farkas: &Farkas) -> (Vec<GroundInstance>, Farkas) {
    let used: Vec<GroundInstance> = gp
        .instances
        .iter()
        .zip(&farkas.mu)
        .filter(|(_, w)| !w.is_zero())
        .map(|(i, _)| i.clone())
        .collect();
    if let Ok(g) = ground_subproblem(cur, &used) {
        if let LpOutcome::Infeasible(f) = simplex_solve(&to_equality_form(&g.milp), &vec![Q::zero(); g.atoms.len()]) {
            return (used, f);
        }
    }
    (gp.instances.clone(), farkas.clone())
}

/// Iterative deepening over Herbrand depth. At each depth the current
/// clauses are grounded and their LP relaxation solved: infeasibility ends
/// the proof, an integral optimum moves to the next depth, and a fractional
/// one yields a tableau cut that is lifted and added as a new clause.
pub fn refute(s: &ReducedSentence, cfg: &RefuteConfig) -> RefuteOutcome {
    let mut cur = s.clone();
    let mut steps: Vec<LiftedCut> = Vec::new();
    let finite = HerbrandStream::from_clauses(&s.clauses).is_finite();
    let mut prev_len = None;
    for d in 0..=cfg.max_depth {
        loop {
            let mut stream = InstanceStream::new(&cur.clauses);
            let all = stream.upto(d).to_vec();
            if all.len() > cfg.max_instances {
                return RefuteOutcome::BudgetExhausted { saturated: false };
            }
            let gp = match ground_subproblem(&cur, &all) {
                Ok(g) => g,
                Err(_) => return RefuteOutcome::BudgetExhausted { saturated: false },
            };
            let t = to_equality_form(&gp.milp);
            let sol = match simplex_solve(&t, &vec![Q::zero(); gp.atoms.len()]) {
                LpOutcome::Infeasible(f) => {
                    let (grounding, farkas) = terminal(&cur, &gp, &f);
                    return RefuteOutcome::Proved(Refutation { steps, grounding, farkas });
                }
                LpOutcome::Unbounded => unreachable!("bounded variables"),
                LpOutcome::Optimal(sol) => sol,
            };
            if gp.milp.is_feasible_point(&sol.x) {
                if finite {
                    return RefuteOutcome::BudgetExhausted { saturated: true };
                }
                if prev_len == Some(all.len()) {
                    return RefuteOutcome::BudgetExhausted { saturated: false };
                }
                prev_len = Some(all.len());
                break;
            }
            if steps.len() >= cfg.cut_budget {
                return RefuteOutcome::BudgetExhausted { saturated: false };
            }
            let Some(step) = separating_cut(&gp.milp, &t, &sol) else {
                break;
            };
            let mut names = NameSource::new();
            names.reserve(clause_vars(&cur.clauses));
            let (req, general, ground) = ground_request(&cur, &gp, &unscaled_lambda(&t, &step.lambda), &mut names);
            let lifted = lifted_cut(&cur, &generalize(&req, &general, &ground)).or_else(|_| lifted_cut(&cur, &req));
            match lifted {
                Ok(lc) => {
                    cur.push(lc.clause.clone(), Provenance::Added);
                    steps.push(lc);
                }
                Err(_) => return RefuteOutcome::BudgetExhausted { saturated: false },
            }
        }
    }
    RefuteOutcome::BudgetExhausted { saturated: false }
}

// ---------------------------------------------------------------------------
// Proof traces
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub picks: Vec<Pick>,
    pub substitution: BTreeMap<String, String>,
    #[serde(with = "serde_q::vec")]
    pub lambda: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    pub weakening: Vec<Q>,
    pub result_clause: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceInstance {
    pub clause: usize,
    pub substitution: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terminal {
    pub grounding: Vec<TraceInstance>,
    pub farkas: Farkas,
}

/// A replayable refutation of a sentence: cut requests against the growing
/// clause list, then a Farkas contradiction over a grounding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub version: u32,
    pub sentence_digest: String,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

impl ProofTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// SHA-256 of the sentence's canonical text.
pub fn sentence_digest(s: &Formula) -> String {
    let mut h = Sha256::new();
    h.update(s.to_ascii().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn sub_to_wire(s: &Substitution) -> BTreeMap<String, String> {
    s.bindings().iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

fn sub_from_wire(m: &BTreeMap<String, String>, sig: &Signature) -> Result<Substitution, LiftedError> {
    let mut b = BTreeMap::new();
    for (k, v) in m {
        b.insert(k.clone(), parse_term(v, sig)?);
    }
    Substitution::new(b).map_err(|e| LiftedError::Parse(e.to_string()))
}

impl TraceStep {
    pub fn from_cut(c: &LiftedCut) -> Self {
        TraceStep {
            picks: c.request.picks.clone(),
            substitution: sub_to_wire(&c.request.substitution),
            lambda: c.request.lambda.clone(),
            weakening: c.request.weakening.clone(),
            result_clause: c.clause.to_string(),
        }
    }

    pub fn to_request(&self, sig: &Signature) -> Result<CutRequest, LiftedError> {
        Ok(CutRequest {
            picks: self.picks.clone(),
            substitution: sub_from_wire(&self.substitution, sig)?,
            lambda: self.lambda.clone(),
            weakening: self.weakening.clone(),
        })
    }
}

pub fn build_trace(s: &Formula, r: &Refutation) -> ProofTrace {
    ProofTrace {
        version: TRACE_VERSION,
        sentence_digest: sentence_digest(s),
        steps: r.steps.iter().map(TraceStep::from_cut).collect(),
        terminal: Terminal {
            grounding: r
                .grounding
                .iter()
                .map(|g| TraceInstance { clause: g.clause, substitution: sub_to_wire(&g.sub) })
                .collect(),
            farkas: r.farkas.clone(),
        },
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unsupported trace version {0}")]
    Version(u32),
    #[error("trace was produced for a different sentence")]
    Digest,
    #[error("step {index} does not replay: {reason}")]
    Step { index: usize, reason: String },
    #[error("terminal step is not a contradiction: {0}")]
    Terminal(String),
}

impl VerifyError {
    /// Index of the failing step; the terminal counts as the last one.
    pub fn step_index(&self, t: &ProofTrace) -> usize {
        match self {
            VerifyError::Step { index, .. } => *index,
            VerifyError::Terminal(_) => t.steps.len(),
            _ => 0,
        }
    }
}

/// Replays every cut from its request, compares it with the recorded clause,
/// and checks the terminal Farkas combination over the final clause list.
pub fn verify_trace(s: &Formula, sig: &Signature, t: &ProofTrace) -> Result<(), VerifyError> {
    if t.version != TRACE_VERSION {
        return Err(VerifyError::Version(t.version));
    }
    if t.sentence_digest != sentence_digest(s) {
        return Err(VerifyError::Digest);
    }
    let mut cur = normalize(s, sig);
    for (index, step) in t.steps.iter().enumerate() {
        let fail = |reason: String| VerifyError::Step { index, reason };
        let req = step.to_request(&cur.signature).map_err(|e| fail(e.to_string()))?;
        let lc = lifted_cut(&cur, &req).map_err(|e| fail(e.to_string()))?;
        let got = lc.clause.to_string();
        if got != step.result_clause {
            return Err(fail(format!("derived `{got}`, recorded `{}`", step.result_clause)));
        }
        cur.push(lc.clause, Provenance::Added);
    }
    let mut grounding = Vec::with_capacity(t.terminal.grounding.len());
    for g in &t.terminal.grounding {
        let sub = sub_from_wire(&g.substitution, &cur.signature).map_err(|e| VerifyError::Terminal(e.to_string()))?;
        grounding.push(GroundInstance { clause: g.clause, sub });
    }
    let gp = ground_subproblem(&cur, &grounding).map_err(|e| VerifyError::Terminal(e.to_string()))?;
    match t.terminal.farkas.check(&gp.milp) {
        Some(_) => Ok(()),
        None => Err(VerifyError::Terminal("the combination does not yield a negative constant".into())),
    }
}

/// Converts a naive-inference certificate into a trace of the same length:
/// each ground cut becomes a request whose picks are the rows it combines,
/// bound by ground substitutions.
pub fn lift_naive_certificate(s: &Formula, sig: &Signature, c: &NaiveCertificate) -> Result<ProofTrace, LiftedError> {
    let base = normalize(s, sig);
    let mut cur = base.clone();
    let m0 = c.problem.instances.len();
    let n = c.problem.atoms.len();
    let mut steps = Vec::new();
    let mut milp: MilpProblem = c.problem.milp.clone();
    for (k, step) in c.certificate.cuts.iter().enumerate() {
        let orig = unscaled_lambda(&to_equality_form(&milp), &step.lambda);
        milp.constraints.push(step.cut.clone());
        let mut names = NameSource::new();
        names.reserve(clause_vars(&cur.clauses));
        let mut picks = Vec::new();
        let mut lambda = Vec::new();
        let mut bind = BTreeMap::new();
        for (row, w) in orig.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            if row < m0 {
                let inst = &c.problem.instances[row];
                let fv = base.clauses[inst.clause].free_vars_ordered();
                let vars: Vec<String> = fv.iter().map(|v| names.fresh(v)).collect();
                for (v, nv) in fv.iter().zip(&vars) {
                    bind.insert(nv.clone(), inst.sub.get(v).cloned().expect("ground instance"));
                }
                picks.push(Pick::Clause { clause: inst.clause, vars });
            } else if row < m0 + k {
                picks.push(Pick::Clause { clause: base.clauses.len() + (row - m0), vars: Vec::new() });
            } else {
                let atom = &c.problem.atoms[row - m0 - k];
                debug_assert!(row - m0 - k < n);
                let vars: Vec<String> = atom.args.iter().map(|_| names.fresh("n")).collect();
                for (nv, t) in vars.iter().zip(&atom.args) {
                    bind.insert(nv.clone(), t.clone());
                }
                picks.push(Pick::Implicit { pred: atom.pred.clone(), side: Side::Upper, vars });
            }
            lambda.push(w.clone());
        }
        let req = CutRequest {
            picks,
            substitution: Substitution::from_pairs(bind).expect("ground bindings"),
            lambda,
            weakening: Vec::new(),
        };
        let lc = lifted_cut(&cur, &req)?;
        cur.push(lc.clause.clone(), Provenance::Added);
        steps.push(lc);
    }
    let mut grounding = c.problem.instances.clone();
    grounding.extend((0..steps.len()).map(|j| GroundInstance { clause: base.clauses.len() + j, sub: Substitution::empty() }));
    let gp = ground_subproblem(&cur, &grounding)?;
    let farkas = match simplex_solve(&to_equality_form(&gp.milp), &vec![Q::zero(); gp.atoms.len()]) {
        LpOutcome::Infeasible(f) => f,
        _ => return Err(LiftedError::NoCut),
    };
    Ok(build_trace(s, &Refutation { steps, grounding, farkas }))
}

// ---------------------------------------------------------------------------
// Entailment and values
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Proved(ProofTrace),
    BudgetExhausted { saturated: bool },
}

/// `s ∧ (-ε/2 - s2)` with both sides closed and `ε` the value spacing of `s2`.
pub fn entailment_refutand(s: &Formula, s2: &Formula, sig: &Signature) -> Result<Formula, LiftedError> {
    let eps = epsilon_of(s2, sig).map_err(LiftedError::MixedFragment)?;
    epsilon_of(s, sig).map_err(LiftedError::MixedFragment)?;
    Ok(epsilon_refutand(s, s2, &(-eps / Q::from_integer(2.into()))))
}

/// `s ∧ (eps - s2)` with both sides closed.
pub fn epsilon_refutand(s: &Formula, s2: &Formula, eps: &Q) -> Formula {
    Formula::min(s.clone().close_inf(), Formula::sub(Formula::scalar(eps.clone()), s2.clone().close_inf()))
}

/// Refutes `f` and packages the result as a trace over `f`.
pub fn refute_formula(f: &Formula, sig: &Signature, cfg: &RefuteConfig) -> Outcome {
    match refute(&normalize(f, sig), cfg) {
        RefuteOutcome::Proved(r) => Outcome::Proved(build_trace(f, &r)),
        RefuteOutcome::BudgetExhausted { saturated } => Outcome::BudgetExhausted { saturated },
    }
}

/// Proves that every model where `s` is feasible gives `s2` a nonnegative
/// value.
pub fn entails(s: &Formula, s2: &Formula, sig: &Signature, cfg: &RefuteConfig) -> Result<Outcome, LiftedError> {
    Ok(refute_formula(&entailment_refutand(s, s2, sig)?, sig, cfg))
}

/// Proves that every model where `s` is feasible gives `s2` a value above `eps`.
pub fn epsilon_entails(s: &Formula, s2: &Formula, eps: &Q, sig: &Signature, cfg: &RefuteConfig) -> Outcome {
    refute_formula(&epsilon_refutand(s, s2, eps), sig, cfg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueBounds {
    pub lower: Option<Q>,
    pub upper: Q,
}

#[derive(Clone, Debug)]
pub struct ValueConfig {
    pub max_depth: usize,
    pub cut_budget: usize,
    pub max_instances: usize,
    /// Largest domain size enumerated for lower bounds.
    pub model_size: usize,
    pub brute_force: BruteForceConfig,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig {
            max_depth: 3,
            cut_budget: 200,
            max_instances: 2000,
            model_size: 2,
            brute_force: BruteForceConfig { cap: 1 << 18, ..Default::default() },
        }
    }
}

/// Bounds the value of `s`. Upper bounds come from maximizing an epigraph
/// variable over Herbrand groundings of increasing depth, each a relaxation.
/// Lower bounds come from exhaustive small models and, when the Herbrand
/// universe is finite, from the exact optimum of the complete grounding.
pub fn infer_value(s: &Formula, sig: &Signature, cfg: &ValueConfig) -> ValueBounds {
    let closed = s.clone().close_inf();
    let mut upper = formula_interval(&closed, sig).hi;
    let mut lower = brute_force_value_upto(&closed, sig, cfg.model_size, &cfg.brute_force).ok();
    let (f, sig2, name, unit) = epigraph(&closed, sig);
    let r = normalize(&f, &sig2);
    let z = PredAtom::new(name, Vec::new());
    let mut stream = InstanceStream::new(&r.clauses);
    let finite = stream.herbrand().is_finite();
    let mut prev = None;
    for d in 0..=cfg.max_depth {
        let all = stream.upto(d).to_vec();
        if all.len() > cfg.max_instances || prev == Some(all.len()) {
            break;
        }
        prev = Some(all.len());
        let Ok(gp) = ground_subproblem(&r, &all) else { break };
        let mut obj = vec![Q::zero(); gp.atoms.len()];
        let Some(k) = gp.atom_index(&z) else { break };
        obj[k] = unit.clone();
        match milp_optimize(&gp.milp, &obj, cfg.cut_budget) {
            Optimization::Optimal { value, .. } => {
                if value < upper {
                    upper = value.clone();
                }
                if finite {
                    lower = Some(lower.map_or(value.clone(), |l| l.max(value)));
                    break;
                }
            }
            Optimization::Bounds { upper: u } => {
                if u < upper {
                    upper = u;
                }
            }
            Optimization::Infeasible => break,
        }
        if finite {
            break;
        }
    }
    ValueBounds { lower, upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_problem};
    use crate::rational::{q, qi};

    fn doubling() -> (ReducedSentence, Signature) {
        let p = parse_problem("pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));").unwrap();
        (normalize(&p.sentence, &p.signature), p.signature)
    }

    fn t(s: &str, sig: &Signature) -> Term {
        parse_term(s, sig).unwrap()
    }

    #[test]
    fn implicit_clauses() {
        let (_, sig) = doubling();
        assert_eq!(implicit_clause(&sig, "x", Side::Upper).unwrap().to_string(), "8 - x(n)");
        assert_eq!(implicit_clause(&sig, "x", Side::Lower).unwrap().to_string(), "x(n)");
        let p = parse_problem("pred flies/1 in int[0,1]; sentence 0;").unwrap();
        assert_eq!(implicit_clause(&p.signature, "flies", Side::Upper).unwrap().to_string(), "1 - flies(n)");
    }

    fn chain_request(sig: &Signature, den: i64) -> CutRequest {
        let picks = ["j", "k", "l", "m"]
            .iter()
            .map(|v| Pick::Clause { clause: 0, vars: vec![v.to_string()] })
            .chain(std::iter::once(Pick::Implicit { pred: "x".into(), side: Side::Upper, vars: vec!["n".into()] }))
            .collect();
        let sub = Substitution::from_pairs([
            ("j".to_string(), t("i", sig)),
            ("k".to_string(), t("S(i)", sig)),
            ("l".to_string(), t("S(S(i))", sig)),
            ("m".to_string(), t("S(S(S(i)))", sig)),
            ("n".to_string(), t("i", sig)),
        ])
        .unwrap();
        CutRequest {
            picks,
            substitution: sub,
            lambda: vec![q(1, den), q(2, den), q(4, den), q(8, den), q(1, den)],
            weakening: Vec::new(),
        }
    }

    #[test]
    fn doubling_chain_single_cut() {
        // The stated combination telescopes to 1/2 - x(S(S(S(S(i))))).
        let (r, sig) = doubling();
        let c = lifted_cut(&r, &chain_request(&sig, 16)).unwrap();
        assert_eq!(c.clause.to_string(), "-x(S(S(S(S(i1)))))");
        assert_eq!(lifted_cut(&r, &chain_request(&sig, 8)), Err(LiftedError::NoCut));
    }

    #[test]
    fn ground_single_pick_no_cut() {
        let p = parse_problem("pred p/1 in int[0,1]; fun A/0; sentence p(A) - 1;").unwrap();
        let r = normalize(&p.sentence, &p.signature);
        let req = CutRequest {
            picks: vec![Pick::Clause { clause: 0, vars: vec![] }],
            substitution: Substitution::empty(),
            lambda: vec![qi(1)],
            weakening: vec![],
        };
        assert_eq!(lifted_cut(&r, &req), Err(LiftedError::NoCut));
    }

    #[test]
    fn resolution_analogue() {
        let p = parse_problem("pred p/1 in int[0,1]; pred q/1 in int[0,1]; sentence (p(x) - q(x)) ^ (q(y) - 1/2);").unwrap();
        let r = normalize(&p.sentence, &p.signature);
        let req = CutRequest {
            picks: vec![
                Pick::Clause { clause: 0, vars: vec!["a".into()] },
                Pick::Clause { clause: 1, vars: vec!["b".into()] },
            ],
            substitution: Substitution::from_pairs([("b".to_string(), Term::var("a"))]).unwrap(),
            lambda: vec![qi(1), qi(1)],
            weakening: vec![],
        };
        // The fractional cut of the combined row keeps only the slack of the
        // half-integral clause: q(a) >= 1/2 strengthens to q(a) >= 1.
        let c = lifted_cut(&r, &req).unwrap();
        assert_eq!(c.clause.to_string(), "q(a1) - 1");
    }

    #[test]
    fn picks_must_be_apart() {
        let (r, _) = doubling();
        let req = CutRequest {
            picks: vec![Pick::Clause { clause: 0, vars: vec!["j".into()] }, Pick::Clause { clause: 0, vars: vec!["j".into()] }],
            substitution: Substitution::empty(),
            lambda: vec![q(1, 2), q(1, 2)],
            weakening: vec![],
        };
        assert_eq!(lifted_cut(&r, &req), Err(LiftedError::NotApart("j".into())));
    }

    #[test]
    fn unification_identifies_atoms() {
        let sig = doubling().1;
        let a = PredAtom::new("x", vec![t("S(j)", &sig)]);
        let b = PredAtom::new("x", vec![t("k", &sig)]);
        let u = unify_atoms(&[(a, b)]).unwrap();
        assert_eq!(u.get("k"), Some(&t("S(j)", &sig)));
        let a = PredAtom::new("x", vec![t("S(j)", &sig)]);
        let b = PredAtom::new("x", vec![t("j", &sig)]);
        assert!(unify_atoms(&[(a, b)]).is_none());
    }

    const EAGLE: &str = "pred bird/1 in int[0,1]; pred flies/1 in int[0,1]; pred eagle/1 in int[0,1];
        fun father/1; fun Stanley/0;
        sentence (flies(x) - bird(x)) ^ (bird(y) - eagle(y)) ^ (eagle(father(z)) - eagle(z)) ^ (eagle(Stanley) - 1);";

    #[test]
    fn eagle_entailment_and_trace() {
        let p = parse_problem(EAGLE).unwrap();
        let query = parse_formula("flies(father(Stanley)) - 1", &p.signature).unwrap();
        let out = entails(&p.sentence, &query, &p.signature, &RefuteConfig::default()).unwrap();
        let Outcome::Proved(trace) = out else { panic!("{out:?}") };
        assert!(trace.steps.len() <= 4);
        let refutand = entailment_refutand(&p.sentence, &query, &p.signature).unwrap();
        verify_trace(&refutand, &p.signature, &trace).unwrap();
        let back = ProofTrace::from_json(&trace.to_json()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn self_entailment() {
        let p = parse_problem("pred eagle/1 in int[0,1]; fun Stanley/0; sentence eagle(Stanley) - 1;").unwrap();
        let out = entails(&p.sentence, &p.sentence, &p.signature, &RefuteConfig::default()).unwrap();
        assert!(matches!(out, Outcome::Proved(_)));
    }

    #[test]
    fn doubling_entails_fourth_successor() {
        let p = parse_problem("pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));").unwrap();
        let q4 = parse_formula("-x(S(S(S(S(i)))))", &p.signature).unwrap();
        let out = entails(&p.sentence, &q4, &p.signature, &RefuteConfig { cut_budget: 50, ..Default::default() }).unwrap();
        let Outcome::Proved(trace) = out else { panic!("{out:?}") };
        let refutand = entailment_refutand(&p.sentence, &q4, &p.signature).unwrap();
        verify_trace(&refutand, &p.signature, &trace).unwrap();
    }

    #[test]
    fn trivial_refutation_exhausts() {
        let p = parse_problem("sentence 1;").unwrap();
        let out = refute_formula(&p.sentence, &p.signature, &RefuteConfig::default());
        assert!(matches!(out, Outcome::BudgetExhausted { .. }));
    }

    #[test]
    fn epsilon_entailment_cases() {
        let p = parse_problem("pred p/0 in real[0,1]; sentence p - 1;").unwrap();
        let s2 = parse_formula("p", &p.signature).unwrap();
        let cfg = RefuteConfig::default();
        assert!(matches!(epsilon_entails(&p.sentence, &s2, &q(1, 2), &p.signature, &cfg), Outcome::Proved(_)));
        assert!(matches!(
            epsilon_entails(&p.sentence, &s2, &qi(1), &p.signature, &cfg),
            Outcome::BudgetExhausted { .. }
        ));
        assert!(matches!(entails(&p.sentence, &s2, &p.signature, &cfg), Err(LiftedError::MixedFragment(_))));
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let p = parse_problem("pred x/1 in int[0,8]; fun S/1; sentence x(i) - 2*x(S(i));").unwrap();
        let q4 = parse_formula("-x(S(S(S(S(i)))))", &p.signature).unwrap();
        let refutand = entailment_refutand(&p.sentence, &q4, &p.signature).unwrap();
        let Outcome::Proved(mut trace) = refute_formula(&refutand, &p.signature, &RefuteConfig::default()) else {
            panic!()
        };
        if let Some(step) = trace.steps.first_mut() {
            for l in step.lambda.iter_mut() {
                *l *= qi(2);
            }
            let err = verify_trace(&refutand, &p.signature, &trace).unwrap_err();
            assert_eq!(err.step_index(&trace), 0);
        }
        let empty = ProofTrace {
            version: TRACE_VERSION,
            sentence_digest: sentence_digest(&p.sentence),
            steps: vec![],
            terminal: Terminal { grounding: vec![], farkas: Farkas { mu: vec![], nu: vec![] } },
        };
        assert!(matches!(verify_trace(&p.sentence, &p.signature, &empty), Err(VerifyError::Terminal(_))));
        assert_eq!(verify_trace(&refutand, &p.signature, &empty), Err(VerifyError::Digest));
    }

    #[test]
    fn value_bounds() {
        let p = parse_problem("sentence 3;").unwrap();
        assert_eq!(infer_value(&p.sentence, &p.signature, &ValueConfig::default()), ValueBounds { lower: Some(qi(3)), upper: qi(3) });
        let p = parse_problem(EAGLE).unwrap();
        assert_eq!(infer_value(&p.sentence, &p.signature, &ValueConfig::default()), ValueBounds { lower: Some(qi(0)), upper: qi(0) });
    }
}
